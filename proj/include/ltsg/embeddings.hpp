#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ltsg/corpus.hpp"
#include "ltsg/huffman.hpp"
#include "ltsg/matrix.hpp"
#include "ltsg/topic_model.hpp"

namespace ltsg {

struct EmbeddingSet {
  MatrixD word_vecs;   // W x d
  MatrixD inner_vecs;  // (W-1) x d, hierarchical softmax nodes
  MatrixD topic_vecs;  // K x d

  std::size_t dim() const noexcept { return word_vecs.cols(); }
  bool all_finite() const;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

// Word vectors uniform in [-0.5/d, 0.5/d]; inner and topic vectors zero.
EmbeddingSet init_embeddings(std::size_t vocab_size, std::size_t num_topics,
                             std::size_t dim, std::uint64_t seed);

// Mean word vector of the tokens assigned to each topic; zero for a topic
// with no tokens.
MatrixD compute_topic_embeddings(const TopicState& state,
                                 const EncodedCorpus& corpus,
                                 const MatrixD& word_vecs);

// T_w = sum_k t_k * phi[k][w].
std::vector<double> global_topic_vector(WordId w, const Phi& phi,
                                        const MatrixD& topic_vecs);
MatrixD global_topic_vectors(const Phi& phi, const MatrixD& topic_vecs);

double sigmoid(double x);
double log_sigmoid(double x);

// log Pr(output | input) under the tree's hierarchical softmax:
// sum over path nodes of log sigmoid((1 - 2 h) * input . v_node).
double hs_log_prob(WordId output, std::span<const double> input,
                   const HuffmanTree& tree, const MatrixD& inner_vecs);

// d log Pr(output | input) / d (input . v_i) for each node on the output
// word's path: g_i = 1 - h_i - sigmoid(input . v_i).
std::vector<double> hs_path_gradient(WordId output, std::span<const double> input,
                                     const HuffmanTree& tree,
                                     const MatrixD& inner_vecs);

// Exact derivative of log Pr(output | T_w) with respect to phi[k][w], given
// the path gradient of that prediction: sum_i g_i * (t_k . v_i).
double phi_partial(std::span<const double> path_gradient, WordId output,
                   std::span<const double> topic_vec, const HuffmanTree& tree,
                   const MatrixD& inner_vecs);

// Sparse (topic, word) -> gradient sum collected over one epoch.
class PhiGradAccumulator {
 public:
  PhiGradAccumulator() = default;
  explicit PhiGradAccumulator(std::size_t vocab_size) : vocab_size_(vocab_size) {}

  void add(int topic, WordId word, double value);
  void merge(const PhiGradAccumulator& other);
  void note_token() { ++token_contributions_; }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t token_contributions() const noexcept { return token_contributions_; }

  // 0 when absent.
  double get(int topic, WordId word) const;
  bool contains(int topic, WordId word) const;

  struct Entry {
    int topic;
    WordId word;
    double value;
  };
  // Sorted by (topic, word).
  std::vector<Entry> entries() const;

 private:
  std::uint64_t key(int topic, WordId word) const {
    return static_cast<std::uint64_t>(topic) * vocab_size_ + static_cast<std::uint64_t>(word);
  }

  std::size_t vocab_size_ = 0;
  std::unordered_map<std::uint64_t, double> entries_;
  std::size_t token_contributions_ = 0;
};

enum class TrainMode { kSkipGramOnly, kLtsg };

struct StepOptions {
  // Accumulate d/d phi[k][w] for every topic k instead of only the
  // center token's assigned topic.
  bool full_phi_grad = false;
};

// One stochastic gradient step for the pair (corpus.docs[m][n], context).
// kWord: ascend log Pr(context | v_center), updating the center word vector
// and the context path's inner vectors.
// kTopic: ascend log Pr(context | T_center), updating the inner vectors and
// adding (1 / path length) * sum_i g_i (t_z . v_i) to phi_acc at
// (z[m][n], center). Gradients use the inner vectors as they were on entry.
enum class TermMode { kWord, kTopic };
void sgd_step(const EncodedCorpus& corpus, const TopicState* state, std::size_t m,
              std::size_t n, WordId context, TermMode mode, double learning_rate,
              EmbeddingSet& emb, const Phi* phi, const HuffmanTree& tree,
              PhiGradAccumulator* phi_acc, const StepOptions& options = {});

struct EpochOptions {
  int window = 5;
  double learning_rate = 0.025;
  double min_learning_rate = -1.0;  // negative: learning_rate * 1e-4
  TrainMode mode = TrainMode::kLtsg;
  int workers = 1;
  bool full_phi_grad = false;
};

struct EpochResult {
  PhiGradAccumulator phi_grad;
  std::size_t tokens = 0;
  std::size_t pairs = 0;
};

// Number of (center, context) pairs a document of `length` tokens yields.
std::size_t count_pairs(std::size_t length, int window);

// One pass over every (center, context) pair. Topic vectors in `emb` are read
// only. With workers > 1, documents are sharded across threads that update
// the shared matrices without synchronization.
EpochResult train_epoch(const EncodedCorpus& corpus, const TopicState* state,
                        const Phi* phi, EmbeddingSet& emb, const HuffmanTree& tree,
                        const EpochOptions& options);

// Average over tokens of the summed per-pair log-likelihood; the ltsg mode
// adds the global-topical-word term.
double average_log_likelihood(const EncodedCorpus& corpus, const TopicState* state,
                              const Phi* phi, const EmbeddingSet& emb,
                              const HuffmanTree& tree, int window, TrainMode mode);

// xi * log(n) / n; zero for n <= 1.
double dynamic_learning_rate(double xi, double n);

// Keeps every entry >= floor and the row summing to one by clamping the
// smallest entries to the floor and rescaling the rest.
void project_row_to_floor(std::span<double> row, double floor);

// phi[k][w] += f(xi, n_kw) * grad(k, w) on accumulated entries, then floor
// at kPhiFloor and renormalize each row.
Phi apply_phi_update(const Phi& phi, const PhiGradAccumulator& acc, double xi,
                     const MatrixI& topic_word_counts);

// word2vec text format: "count dim" header then "token v1 ... vd".
void save_word2vec_text(const std::filesystem::path& path,
                        std::span<const std::string> names, const MatrixD& vecs);
struct NamedVectors {
  std::vector<std::string> names;
  MatrixD vecs;
};
NamedVectors load_word2vec_text(const std::filesystem::path& path);

std::string topic_token(int k);

}  // namespace ltsg
