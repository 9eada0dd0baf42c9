#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ltsg/corpus.hpp"
#include "ltsg/embeddings.hpp"
#include "ltsg/matrix.hpp"
#include "ltsg/topic_model.hpp"
#include "ltsg/trainer.hpp"

namespace ltsg {

// ---- topic coherence ------------------------------------------------------

// The n most probable words of topic k, ties broken by lower word id.
std::vector<WordId> top_words(const Phi& phi, std::size_t k, std::size_t n = 10);

// Document and co-document frequencies over a corpus.
class DocumentFrequency {
 public:
  DocumentFrequency(const EncodedCorpus& corpus, std::size_t vocab_size);

  std::size_t df(WordId w) const { return postings_.at(w).size(); }
  std::size_t co_df(WordId a, WordId b) const;
  std::size_t num_docs() const noexcept { return num_docs_; }

 private:
  std::vector<std::vector<std::uint32_t>> postings_;  // sorted doc ids per word
  std::size_t num_docs_ = 0;
};

// sum_{m>=2} sum_{l<m} log((D(v_m, v_l) + 1) / D(v_l)).
// Throws ErrorKind::kInvalidArgument when a word never occurs.
double umass_coherence(std::span<const WordId> words, const DocumentFrequency& df);

struct TopicCoherence {
  std::vector<std::vector<WordId>> top;
  std::vector<double> scores;
  double average = 0.0;
};

TopicCoherence topic_coherence(const Phi& phi, const EncodedCorpus& corpus,
                               std::size_t top_n = 10);

// `topic_id score top_words...` per topic, then `average <score>`.
void write_coherence_report(std::ostream& out, const TopicCoherence& report,
                            const Vocabulary& vocab);

// ---- contextual word similarity ------------------------------------------

// Pr(z | w, c) ∝ phi[z][w] * Pr(z | c).
std::vector<double> word_topic_posterior(WordId w, std::span<const double> context_topics,
                                         const Phi& phi);
// Same, with Pr(z | c) obtained by folding the context in.
std::vector<double> word_topic_posterior(WordId w, std::span<const WordId> context,
                                         const Phi& phi, double alpha,
                                         const FoldInOptions& options, Rng& rng);

// v_w ⊕ t_k.
std::vector<double> topical_word_vector(WordId w, std::size_t k, const EmbeddingSet& emb);

// 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

double avg_sim_c(WordId wi, std::span<const double> posterior_i, WordId wj,
                 std::span<const double> posterior_j, const EmbeddingSet& emb);
double max_sim_c(WordId wi, std::span<const double> posterior_i, WordId wj,
                 std::span<const double> posterior_j, const EmbeddingSet& emb);

// First index of the maximum.
std::size_t argmax(std::span<const double> values);

// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);
double pearson(std::span<const double> x, std::span<const double> y);
double spearman_rho(std::span<const double> x, std::span<const double> y);

struct ScwsPair {
  std::string word1;
  std::string word2;
  std::string context1;  // markers stripped
  std::string context2;
  double human_score = 0.0;
};

struct ScwsFile {
  std::vector<ScwsPair> pairs;
  std::size_t malformed_lines = 0;
};

// Tab-separated: id, word1, POS1, word2, POS2, context1, context2, average
// rating, then individual ratings. Targets are wrapped in <b>...</b>.
ScwsFile parse_scws(std::istream& in);
ScwsFile load_scws(const std::filesystem::path& path);

enum class SimilarityMode { kAvgSimC, kMaxSimC, kWordOnly };
SimilarityMode parse_similarity_mode(std::string_view name);

struct ScwsResult {
  double rho_x100 = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::vector<double> model_scores;
  std::vector<double> human_scores;
};

// Pairs with an out-of-vocabulary target are skipped and counted. Throws
// ErrorKind::kNoEvaluablePairs when nothing is left.
ScwsResult scws_evaluate(std::span<const ScwsPair> pairs, const ModelBundle& model,
                         SimilarityMode mode, std::uint64_t seed,
                         const FoldInOptions& fold_in = {});

// ---- document features and classification --------------------------------

enum class DocEmbeddingMethod { kTheta, kTopic, kWord, kLtsg };
DocEmbeddingMethod parse_doc_embedding(std::string_view name);
std::string_view to_string(DocEmbeddingMethod method);
std::size_t feature_dim(DocEmbeddingMethod method, std::size_t num_topics, std::size_t dim);

// theta -> K, topic -> d (sum_k theta_k t_k), word -> d (mean word vector),
// ltsg -> 2d (mean of v_w ⊕ t_z over tokens).
std::vector<double> document_embedding(std::span<const WordId> tokens,
                                       std::span<const int> assignments,
                                       std::span<const double> theta,
                                       const EmbeddingSet* emb,
                                       DocEmbeddingMethod method);

// Features for the bundle's own training documents.
MatrixD training_features(const ModelBundle& model, const EncodedCorpus& corpus,
                          DocEmbeddingMethod method);

// Features for unseen documents; topics come from fold-in with a per-document
// seeded stream.
MatrixD heldout_features(const ModelBundle& model, const EncodedCorpus& corpus,
                         DocEmbeddingMethod method, std::uint64_t seed,
                         const FoldInOptions& fold_in = {});

struct ClassifierModel {
  int num_classes = 0;
  MatrixD weights;  // classes x features
  std::vector<double> bias;
  std::vector<double> feature_mean;   // standardization applied before weights
  std::vector<double> feature_scale;

  std::size_t num_features() const noexcept { return weights.cols(); }
};

struct ClassifierOptions {
  int epochs = 30;
  double l2 = 1e-4;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
};

// L2-regularized multinomial logistic regression trained by SGD on
// standardized features.
ClassifierModel train_classifier(const MatrixD& features, std::span<const int> labels,
                                 int num_classes, const ClassifierOptions& options = {});

std::vector<double> class_probabilities(const ClassifierModel& model,
                                        std::span<const double> features);
int predict(const ClassifierModel& model, std::span<const double> features);

struct ClassificationReport {
  // percentages
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  MatrixI confusion;  // truth x predicted
};

ClassificationReport score_predictions(std::span<const int> truth,
                                       std::span<const int> predicted, int num_classes);
ClassificationReport evaluate_classification(const ClassifierModel& model,
                                             const MatrixD& features,
                                             std::span<const int> labels);

// Human-readable table followed by metric=value lines.
void write_classification_report(std::ostream& out, const ClassificationReport& report,
                                 std::span<const std::string> class_names);

// `label index:value ...` with 1-based feature indices.
void export_sparse_features(std::ostream& out, const MatrixD& features,
                            std::span<const int> labels);

}  // namespace ltsg
