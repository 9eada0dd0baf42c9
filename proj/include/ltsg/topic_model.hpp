#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ltsg/corpus.hpp"
#include "ltsg/matrix.hpp"
#include "ltsg/random.hpp"

namespace ltsg {

// Lower bound on every topic-word probability; the phi-driven sampler
// multiplies by phi directly.
inline constexpr double kPhiFloor = 1e-10;

struct Hyperparams {
  int num_topics = 1;
  double alpha = 0.01;
  double beta = 0.1;

  void validate() const;
};

// Topic assignments plus the count matrices they imply.
struct TopicState {
  int num_topics = 0;
  int vocab_size = 0;
  std::vector<std::vector<int>> z;  // z[m][n] in [0, num_topics)
  MatrixI topic_word;               // K x W
  MatrixI doc_topic;                // M x K
  std::vector<std::int64_t> topic_totals;  // row sums of topic_word

  std::size_t num_docs() const noexcept { return z.size(); }
  std::size_t total_tokens() const;

  // Rebuilds every count from the corpus tokens and the assignments.
  static TopicState from_assignments(const EncodedCorpus& corpus, int num_topics,
                                     int vocab_size, std::vector<std::vector<int>> z);

  // True when every count equals its recomputation from z.
  bool counts_consistent(const EncodedCorpus& corpus) const;

  friend bool operator==(const TopicState&, const TopicState&) = default;
};

struct Phi {
  MatrixD values;  // K x W, rows sum to one

  std::size_t num_topics() const noexcept { return values.rows(); }
  std::size_t vocab_size() const noexcept { return values.cols(); }
  double operator()(std::size_t k, std::size_t w) const { return values(k, w); }

  friend bool operator==(const Phi&, const Phi&) = default;
};

struct Theta {
  MatrixD values;  // M x K, rows sum to one

  friend bool operator==(const Theta&, const Theta&) = default;
};

// Throws ErrorKind::kInvalidPhi on a non-finite or non-positive entry.
void validate_phi(const Phi& phi);

enum class SamplingRule { kLda, kLtsg };

TopicState init_assignments(const EncodedCorpus& corpus, int num_topics,
                            int vocab_size, Rng& rng);
TopicState init_assignments(const EncodedCorpus& corpus, int num_topics,
                            int vocab_size, std::uint64_t seed);

// Full conditional of z[m][n] under the collapsed LDA sampler. The token's
// own assignment is removed from the counts before evaluation.
std::vector<double> lda_conditional(const TopicState& state,
                                    const EncodedCorpus& corpus,
                                    const Hyperparams& hyper, std::size_t m,
                                    std::size_t n);

// Conditional with the word factor replaced by phi[k][w].
std::vector<double> ltsg_conditional(const TopicState& state,
                                     const EncodedCorpus& corpus, const Phi& phi,
                                     double alpha, std::size_t m, std::size_t n);

// Draws an index from unnormalized non-negative weights by inverse CDF with a
// single uniform draw.
std::size_t sample_discrete(std::span<const double> weights, Rng& rng);

// Resamples every token once, documents in order, tokens left to right.
// `phi` is required for SamplingRule::kLtsg.
void gibbs_sweep(TopicState& state, const EncodedCorpus& corpus,
                 SamplingRule rule, const Hyperparams& hyper, const Phi* phi,
                 Rng& rng);

Phi estimate_phi(const TopicState& state, double beta);
Theta estimate_theta(const TopicState& state, double alpha);

struct FoldInOptions {
  int sweeps = 20;
  int burn_in = -1;  // negative: sweeps / 2
};

struct FoldInResult {
  std::vector<double> distribution;
  std::vector<WordId> tokens;  // in-vocabulary tokens actually sampled
  std::vector<int> assignments;  // final-sweep assignment per kept token
};

// Samples topics for an unseen document with phi held fixed and returns the
// smoothed topic proportions averaged over the post-burn-in sweeps.
// Tokens outside [0, W) are dropped; an empty document yields uniform.
FoldInResult fold_in_document(std::span<const WordId> tokens, const Phi& phi,
                              double alpha, const FoldInOptions& options,
                              Rng& rng);

// Binary layout, all little-endian: u64 M, u64 K, u64 W, u64 N_total, then per
// document u32 length followed by (u32 token, u32 topic) pairs.
void save_assignments(const EncodedCorpus& corpus, const TopicState& state,
                      const std::filesystem::path& path);

struct LoadedAssignments {
  EncodedCorpus corpus;
  TopicState state;
};
LoadedAssignments load_assignments(const std::filesystem::path& path);

}  // namespace ltsg
