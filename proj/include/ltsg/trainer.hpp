#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltsg/corpus.hpp"
#include "ltsg/embeddings.hpp"
#include "ltsg/huffman.hpp"
#include "ltsg/topic_model.hpp"

namespace ltsg {

enum class RunMode { kLtsg, kSkipGramOnly, kLdaOnly, kFrozenPhi };

RunMode parse_run_mode(std::string_view name);
std::string_view to_string(RunMode mode);

enum class Profile { kPaper, kDesk };

Profile parse_profile(std::string_view name);
std::string_view to_string(Profile profile);

struct TrainConfig {
  int num_topics = 80;
  int dim = 400;
  int window = 5;
  double alpha = 0.01;
  double beta = 0.1;
  int init_iters = 2500;   // LDA sweeps before the outer loop
  int outer_iters = 5;     // interactive-learning iterations
  int gibbs_iters = 200;   // ltsg-rule sweeps per outer iteration
  int epochs = 1;          // embedding passes per outer iteration
  double eta = 0.025;
  double xi = 0.1;
  bool xi_decay = false;   // xi / (i + 1) at outer iteration i
  bool full_phi_grad = false;
  int min_count = 5;
  std::uint64_t seed = 1;
  int workers = 1;
  RunMode mode = RunMode::kLtsg;
  bool strip_headers = false;

  static TrainConfig defaults(Profile profile);
  void validate() const;
  Hyperparams hyperparams() const { return {num_topics, alpha, beta}; }

  // Flat key=value view using the CLI flag names.
  std::map<std::string, std::string> to_map() const;
  static TrainConfig from_map(const std::map<std::string, std::string>& values);

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Provenance {
  std::uint64_t corpus_hash = 0;
  std::int64_t created_unix = 0;
  std::string version;
  // Raw-corpus handling, e.g. input format and holdout split.
  std::map<std::string, std::string> preprocessing;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TopicModelPart {
  TopicState state;
  Phi phi;
  Theta theta;

  friend bool operator==(const TopicModelPart&, const TopicModelPart&) = default;
};

struct ModelBundle {
  Vocabulary vocab;
  TrainConfig config;
  EncodedCorpus corpus;  // training documents (tokens only)
  std::optional<TopicModelPart> topics;    // absent for skipgram-only
  std::optional<EmbeddingSet> embeddings;  // absent for lda-only
  std::optional<HuffmanTree> tree;         // present with embeddings
  Provenance provenance;

  bool has_topics() const noexcept { return topics.has_value(); }
  bool has_embeddings() const noexcept { return embeddings.has_value(); }

  // Throws ErrorKind::kDimensionMismatch when W, K, M or d disagree.
  void check_consistency() const;
};

struct IterationReport {
  int iteration = 0;
  std::size_t epoch_tokens = 0;
  std::size_t epoch_pairs = 0;
  std::size_t phi_entries_updated = 0;
};

struct RunObserver {
  // Called after the topic embeddings of an outer iteration are computed,
  // before the embedding epochs of that iteration.
  std::function<void(int iteration, const TopicState&, const EmbeddingSet&)> on_topic_embeddings;
  std::function<void(const IterationReport&)> on_iteration;
  std::function<void(const std::string&)> log;
};

ModelBundle run_ltsg(const TrainConfig& config, const Vocabulary& vocab,
                     const EncodedCorpus& corpus, const RunObserver& observer = {});

inline constexpr int kBundleFormatVersion = 1;
inline constexpr std::string_view kToolVersion = "ltsg 1.0.0";

// Directory with manifest.txt, vocab.tsv and, depending on the mode,
// phi.txt, theta.txt, assignments.bin, words.vec, topics.vec, inner.bin.
void save_model(const ModelBundle& bundle, const std::filesystem::path& dir);
ModelBundle load_model(const std::filesystem::path& dir);

}  // namespace ltsg
