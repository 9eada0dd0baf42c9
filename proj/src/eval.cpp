#include "ltsg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "ltsg/error.hpp"
#include "ltsg/random.hpp"

namespace ltsg {

// ---- topic coherence ------------------------------------------------------

std::vector<WordId> top_words(const Phi& phi, std::size_t k, std::size_t n) {
  if (k >= phi.num_topics()) {
    throw Error(ErrorKind::kInvalidArgument, "topic index out of range");
  }
  const auto W = phi.vocab_size();
  std::vector<WordId> ids(W);
  std::iota(ids.begin(), ids.end(), 0);
  const auto take = std::min(n, W);
  const auto row = phi.values.row(k);
  std::partial_sort(ids.begin(), ids.begin() + take, ids.end(), [&](WordId a, WordId b) {
    return row[a] != row[b] ? row[a] > row[b] : a < b;
  });
  ids.resize(take);
  return ids;
}

DocumentFrequency::DocumentFrequency(const EncodedCorpus& corpus, std::size_t vocab_size)
    : postings_(vocab_size), num_docs_(corpus.docs.size()) {
  for (std::size_t m = 0; m < corpus.docs.size(); ++m) {
    for (WordId w : corpus.docs[m]) {
      auto& list = postings_.at(w);
      if (list.empty() || list.back() != m) list.push_back(static_cast<std::uint32_t>(m));
    }
  }
}

std::size_t DocumentFrequency::co_df(WordId a, WordId b) const {
  const auto& x = postings_.at(a);
  const auto& y = postings_.at(b);
  std::size_t i = 0, j = 0, both = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) {
      ++i;
    } else if (y[j] < x[i]) {
      ++j;
    } else {
      ++both;
      ++i;
      ++j;
    }
  }
  return both;
}

double umass_coherence(std::span<const WordId> words, const DocumentFrequency& df) {
  double score = 0.0;
  for (std::size_t m = 1; m < words.size(); ++m) {
    for (std::size_t l = 0; l < m; ++l) {
      const auto d_l = df.df(words[l]);
      if (d_l == 0) {
        throw Error(ErrorKind::kInvalidArgument,
                    "word " + std::to_string(words[l]) + " has zero document frequency");
      }
      score += std::log((static_cast<double>(df.co_df(words[m], words[l])) + 1.0) /
                        static_cast<double>(d_l));
    }
  }
  return score;
}

TopicCoherence topic_coherence(const Phi& phi, const EncodedCorpus& corpus,
                               std::size_t top_n) {
  DocumentFrequency df(corpus, phi.vocab_size());
  TopicCoherence out;
  for (std::size_t k = 0; k < phi.num_topics(); ++k) {
    out.top.push_back(top_words(phi, k, top_n));
    out.scores.push_back(umass_coherence(out.top.back(), df));
  }
  if (!out.scores.empty()) {
    out.average = std::accumulate(out.scores.begin(), out.scores.end(), 0.0) /
                  static_cast<double>(out.scores.size());
  }
  return out;
}

void write_coherence_report(std::ostream& out, const TopicCoherence& report,
                            const Vocabulary& vocab) {
  out << std::fixed << std::setprecision(4);
  for (std::size_t k = 0; k < report.scores.size(); ++k) {
    out << k << ' ' << report.scores[k];
    for (WordId w : report.top[k]) out << ' ' << vocab.word(w);
    out << '\n';
  }
  out << "average " << report.average << '\n';
  out.unsetf(std::ios::floatfield);
}

// ---- contextual word similarity ------------------------------------------

std::vector<double> word_topic_posterior(WordId w, std::span<const double> context_topics,
                                         const Phi& phi) {
  const auto K = phi.num_topics();
  if (context_topics.size() != K) {
    throw Error(ErrorKind::kDimensionMismatch, "context distribution length != K");
  }
  std::vector<double> post(K);
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    post[k] = phi(k, w) * context_topics[k];
    total += post[k];
  }
  if (!(total > 0.0)) {
    std::fill(post.begin(), post.end(), 1.0 / static_cast<double>(K));
    return post;
  }
  for (double& p : post) p /= total;
  return post;
}

std::vector<double> word_topic_posterior(WordId w, std::span<const WordId> context,
                                         const Phi& phi, double alpha,
                                         const FoldInOptions& options, Rng& rng) {
  auto fold = fold_in_document(context, phi, alpha, options, rng);
  return word_topic_posterior(w, fold.distribution, phi);
}

std::vector<double> topical_word_vector(WordId w, std::size_t k, const EmbeddingSet& emb) {
  const auto d = emb.dim();
  std::vector<double> out(2 * d);
  const auto v = emb.word_vecs.row(w);
  const auto t = emb.topic_vecs.row(k);
  std::copy(v.begin(), v.end(), out.begin());
  std::copy(t.begin(), t.end(), out.begin() + static_cast<std::ptrdiff_t>(d));
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

double avg_sim_c(WordId wi, std::span<const double> posterior_i, WordId wj,
                 std::span<const double> posterior_j, const EmbeddingSet& emb) {
  const auto K = emb.topic_vecs.rows();
  std::vector<std::vector<double>> vj(K);
  for (std::size_t k = 0; k < K; ++k) vj[k] = topical_word_vector(wj, k, emb);
  double total = 0.0;
  for (std::size_t z = 0; z < K; ++z) {
    if (posterior_i[z] == 0.0) continue;
    const auto vi = topical_word_vector(wi, z, emb);
    for (std::size_t z2 = 0; z2 < K; ++z2) {
      if (posterior_j[z2] == 0.0) continue;
      total += posterior_i[z] * posterior_j[z2] * cosine(vi, vj[z2]);
    }
  }
  return total;
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

double max_sim_c(WordId wi, std::span<const double> posterior_i, WordId wj,
                 std::span<const double> posterior_j, const EmbeddingSet& emb) {
  return cosine(topical_word_vector(wi, argmax(posterior_i), emb),
                topical_word_vector(wj, argmax(posterior_j), emb));
}

std::vector<double> average_ranks(std::span<const double> values) {
  const auto n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "correlation needs two equal-length lists of >= 2");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

namespace {

std::string strip_markers(std::string text) {
  for (std::string_view tag : {"<b>", "</b>"}) {
    for (auto pos = text.find(tag); pos != std::string::npos; pos = text.find(tag, pos)) {
      text.replace(pos, tag.size(), " ");
    }
  }
  return text;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos
                                                                 : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

WordId lookup_target(const std::string& word, const Vocabulary& vocab) {
  const auto toks = tokenize(word);
  return toks.size() == 1 ? vocab.id(toks[0]) : -1;
}

std::uint64_t hash_tokens(std::span<const WordId> tokens) {
  std::uint64_t h = 14695981039346656037ULL;
  for (WordId w : tokens) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(w));
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

ScwsFile parse_scws(std::istream& in) {
  ScwsFile out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    bool ok = f.size() >= 8;
    ScwsPair pair;
    if (ok) {
      pair.word1 = f[1];
      pair.word2 = f[3];
      pair.context1 = strip_markers(f[5]);
      pair.context2 = strip_markers(f[6]);
      char* end = nullptr;
      pair.human_score = std::strtod(f[7].c_str(), &end);
      ok = !f[7].empty() && end == f[7].c_str() + f[7].size() &&
           pair.human_score >= 0.0 && pair.human_score <= 10.0 &&
           !tokenize(pair.context1).empty() && !tokenize(pair.context2).empty();
    }
    if (!ok) {
      ++out.malformed_lines;
      std::cerr << "warning: skipping malformed SCWS line " << lineno << "\n";
      continue;
    }
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

ScwsFile load_scws(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  return parse_scws(in);
}

SimilarityMode parse_similarity_mode(std::string_view name) {
  if (name == "AvgSimC") return SimilarityMode::kAvgSimC;
  if (name == "MaxSimC") return SimilarityMode::kMaxSimC;
  if (name == "word-only") return SimilarityMode::kWordOnly;
  throw Error(ErrorKind::kInvalidArgument, "unknown similarity mode '" + std::string(name) + "'");
}

ScwsResult scws_evaluate(std::span<const ScwsPair> pairs, const ModelBundle& model,
                         SimilarityMode mode, std::uint64_t seed,
                         const FoldInOptions& fold_in) {
  if (!model.embeddings) {
    throw Error(ErrorKind::kInvalidArgument, "model has no embeddings");
  }
  if (mode != SimilarityMode::kWordOnly && !model.topics) {
    throw Error(ErrorKind::kInvalidArgument, "contextual similarity needs a topic model");
  }
  const auto& emb = *model.embeddings;
  ScwsResult result;
  auto posterior = [&](WordId w, const std::string& context) {
    const auto tokens = encode_text(context, model.vocab);
    Rng rng(derive_seed(seed, hash_tokens(tokens)));
    return word_topic_posterior(w, tokens, model.topics->phi, model.config.alpha, fold_in, rng);
  };
  for (const auto& pair : pairs) {
    const WordId w1 = lookup_target(pair.word1, model.vocab);
    const WordId w2 = lookup_target(pair.word2, model.vocab);
    if (w1 < 0 || w2 < 0) {
      ++result.skipped;
      continue;
    }
    double score = 0.0;
    if (mode == SimilarityMode::kWordOnly) {
      score = cosine(emb.word_vecs.row(w1), emb.word_vecs.row(w2));
    } else {
      const auto p1 = posterior(w1, pair.context1);
      const auto p2 = posterior(w2, pair.context2);
      score = mode == SimilarityMode::kAvgSimC ? avg_sim_c(w1, p1, w2, p2, emb)
                                               : max_sim_c(w1, p1, w2, p2, emb);
    }
    result.model_scores.push_back(score);
    result.human_scores.push_back(pair.human_score);
  }
  result.evaluated = result.model_scores.size();
  if (result.evaluated < 2) {
    throw Error(ErrorKind::kNoEvaluablePairs, "no evaluable pairs");
  }
  result.rho_x100 = 100.0 * spearman_rho(result.model_scores, result.human_scores);
  return result;
}

// ---- document features and classification --------------------------------

DocEmbeddingMethod parse_doc_embedding(std::string_view name) {
  if (name == "theta") return DocEmbeddingMethod::kTheta;
  if (name == "topic") return DocEmbeddingMethod::kTopic;
  if (name == "word") return DocEmbeddingMethod::kWord;
  if (name == "ltsg") return DocEmbeddingMethod::kLtsg;
  throw Error(ErrorKind::kInvalidArgument, "unknown document embedding '" + std::string(name) + "'");
}

std::string_view to_string(DocEmbeddingMethod method) {
  switch (method) {
    case DocEmbeddingMethod::kTheta: return "theta";
    case DocEmbeddingMethod::kTopic: return "topic";
    case DocEmbeddingMethod::kWord: return "word";
    case DocEmbeddingMethod::kLtsg: return "ltsg";
  }
  return "?";
}

std::size_t feature_dim(DocEmbeddingMethod method, std::size_t num_topics, std::size_t dim) {
  switch (method) {
    case DocEmbeddingMethod::kTheta: return num_topics;
    case DocEmbeddingMethod::kTopic:
    case DocEmbeddingMethod::kWord: return dim;
    case DocEmbeddingMethod::kLtsg: return 2 * dim;
  }
  return 0;
}

std::vector<double> document_embedding(std::span<const WordId> tokens,
                                       std::span<const int> assignments,
                                       std::span<const double> theta,
                                       const EmbeddingSet* emb,
                                       DocEmbeddingMethod method) {
  if (method == DocEmbeddingMethod::kTheta) return {theta.begin(), theta.end()};
  if (emb == nullptr) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(to_string(method)) + " features need embeddings");
  }
  const auto d = emb->dim();
  switch (method) {
    case DocEmbeddingMethod::kTopic: {
      if (theta.size() != emb->topic_vecs.rows()) {
        throw Error(ErrorKind::kDimensionMismatch, "theta length != number of topic vectors");
      }
      std::vector<double> out(d, 0.0);
      for (std::size_t k = 0; k < theta.size(); ++k) {
        const auto t = emb->topic_vecs.row(k);
        for (std::size_t i = 0; i < d; ++i) out[i] += theta[k] * t[i];
      }
      return out;
    }
    case DocEmbeddingMethod::kWord: {
      std::vector<double> out(d, 0.0);
      for (WordId w : tokens) {
        const auto v = emb->word_vecs.row(w);
        for (std::size_t i = 0; i < d; ++i) out[i] += v[i];
      }
      if (!tokens.empty()) {
        for (double& x : out) x /= static_cast<double>(tokens.size());
      }
      return out;
    }
    case DocEmbeddingMethod::kLtsg: {
      if (assignments.size() != tokens.size()) {
        throw Error(ErrorKind::kDimensionMismatch, "assignments length != token count");
      }
      std::vector<double> out(2 * d, 0.0);
      for (std::size_t n = 0; n < tokens.size(); ++n) {
        const auto v = emb->word_vecs.row(tokens[n]);
        const auto t = emb->topic_vecs.row(assignments[n]);
        for (std::size_t i = 0; i < d; ++i) {
          out[i] += v[i];
          out[d + i] += t[i];
        }
      }
      if (!tokens.empty()) {
        for (double& x : out) x /= static_cast<double>(tokens.size());
      }
      return out;
    }
    case DocEmbeddingMethod::kTheta: break;
  }
  return {};
}

namespace {

void require_parts(const ModelBundle& model, DocEmbeddingMethod method) {
  const bool needs_topics = method != DocEmbeddingMethod::kWord;
  const bool needs_embeddings = method != DocEmbeddingMethod::kTheta;
  if (needs_topics && !model.topics) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(to_string(method)) + " features need a topic model");
  }
  if (needs_embeddings && !model.embeddings) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(to_string(method)) + " features need embeddings");
  }
}

std::size_t model_feature_dim(const ModelBundle& model, DocEmbeddingMethod method) {
  const std::size_t K = model.topics ? model.topics->phi.num_topics() : 0;
  const std::size_t d = model.embeddings ? model.embeddings->dim() : 0;
  return feature_dim(method, K, d);
}

}  // namespace

MatrixD training_features(const ModelBundle& model, const EncodedCorpus& corpus,
                          DocEmbeddingMethod method) {
  require_parts(model, method);
  const auto M = corpus.docs.size();
  const EmbeddingSet* emb = model.embeddings ? &*model.embeddings : nullptr;
  if (model.topics && model.topics->state.num_docs() != M &&
      method != DocEmbeddingMethod::kWord) {
    throw Error(ErrorKind::kDimensionMismatch, "corpus does not match the model's training documents");
  }
  MatrixD out(M, model_feature_dim(model, method));
  for (std::size_t m = 0; m < M; ++m) {
    std::span<const int> z;
    std::span<const double> theta;
    if (model.topics && method != DocEmbeddingMethod::kWord) {
      z = model.topics->state.z[m];
      theta = model.topics->theta.values.row(m);
      if (z.size() != corpus.docs[m].size()) {
        throw Error(ErrorKind::kDimensionMismatch,
                    "document " + std::to_string(m) + " does not match the model's assignments");
      }
    }
    const auto f = document_embedding(corpus.docs[m], z, theta, emb, method);
    std::copy(f.begin(), f.end(), out.row(m).begin());
  }
  return out;
}

MatrixD heldout_features(const ModelBundle& model, const EncodedCorpus& corpus,
                         DocEmbeddingMethod method, std::uint64_t seed,
                         const FoldInOptions& fold_in) {
  require_parts(model, method);
  const EmbeddingSet* emb = model.embeddings ? &*model.embeddings : nullptr;
  MatrixD out(corpus.docs.size(), model_feature_dim(model, method));
  for (std::size_t m = 0; m < corpus.docs.size(); ++m) {
    std::vector<double> f;
    if (method == DocEmbeddingMethod::kWord) {
      f = document_embedding(corpus.docs[m], {}, {}, emb, method);
    } else {
      Rng rng(derive_seed(seed, m));
      auto fold = fold_in_document(corpus.docs[m], model.topics->phi, model.config.alpha,
                                   fold_in, rng);
      f = document_embedding(fold.tokens, fold.assignments, fold.distribution, emb, method);
    }
    std::copy(f.begin(), f.end(), out.row(m).begin());
  }
  return out;
}

namespace {

void softmax_scores(const ClassifierModel& model, std::span<const double> x,
                    std::vector<double>& scratch, std::vector<double>& probs) {
  const auto F = model.num_features();
  scratch.resize(F);
  for (std::size_t i = 0; i < F; ++i) {
    scratch[i] = (x[i] - model.feature_mean[i]) * model.feature_scale[i];
  }
  probs.resize(model.num_classes);
  double top = -INFINITY;
  for (int c = 0; c < model.num_classes; ++c) {
    probs[c] = model.bias[c] + dot(model.weights.row(c), scratch);
    top = std::max(top, probs[c]);
  }
  double total = 0.0;
  for (double& p : probs) {
    p = std::exp(p - top);
    total += p;
  }
  for (double& p : probs) p /= total;
}

}  // namespace

ClassifierModel train_classifier(const MatrixD& features, std::span<const int> labels,
                                 int num_classes, const ClassifierOptions& options) {
  const auto N = features.rows();
  const auto F = features.cols();
  if (labels.size() != N || N == 0) {
    throw Error(ErrorKind::kInvalidArgument, "need one label per feature row (and >= 1 row)");
  }
  if (num_classes < 1) throw Error(ErrorKind::kInvalidArgument, "need >= 1 class");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw Error(ErrorKind::kInvalidArgument, "label out of range");
  }
  ClassifierModel model;
  model.num_classes = num_classes;
  model.weights = MatrixD(num_classes, F, 0.0);
  model.bias.assign(num_classes, 0.0);
  model.feature_mean.assign(F, 0.0);
  model.feature_scale.assign(F, 1.0);
  for (std::size_t r = 0; r < N; ++r) {
    for (std::size_t i = 0; i < F; ++i) model.feature_mean[i] += features(r, i);
  }
  for (double& m : model.feature_mean) m /= static_cast<double>(N);
  for (std::size_t i = 0; i < F; ++i) {
    double var = 0.0;
    for (std::size_t r = 0; r < N; ++r) {
      const double dlt = features(r, i) - model.feature_mean[i];
      var += dlt * dlt;
    }
    var /= static_cast<double>(N);
    model.feature_scale[i] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  }

  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.seed);
  std::vector<double> x, probs;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = N; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    const double lr = options.learning_rate / std::sqrt(1.0 + epoch);
    for (std::size_t r : order) {
      softmax_scores(model, features.row(r), x, probs);
      for (int c = 0; c < num_classes; ++c) {
        const double err = probs[c] - (c == labels[r] ? 1.0 : 0.0);
        auto w = model.weights.row(c);
        for (std::size_t i = 0; i < F; ++i) {
          w[i] -= lr * (err * x[i] + options.l2 * w[i]);
        }
        model.bias[c] -= lr * err;
      }
    }
  }
  return model;
}

std::vector<double> class_probabilities(const ClassifierModel& model,
                                        std::span<const double> features) {
  if (features.size() != model.num_features()) {
    throw Error(ErrorKind::kDimensionMismatch, "feature length does not match classifier");
  }
  std::vector<double> x, probs;
  softmax_scores(model, features, x, probs);
  return probs;
}

int predict(const ClassifierModel& model, std::span<const double> features) {
  const auto probs = class_probabilities(model, features);
  return static_cast<int>(argmax(probs));
}

ClassificationReport score_predictions(std::span<const int> truth,
                                       std::span<const int> predicted, int num_classes) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorKind::kInvalidArgument, "truth/prediction length mismatch");
  }
  ClassificationReport r;
  r.confusion = MatrixI(num_classes, num_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 ||
        predicted[i] >= num_classes) {
      throw Error(ErrorKind::kInvalidArgument, "label out of range");
    }
    ++r.confusion(truth[i], predicted[i]);
    if (truth[i] == predicted[i]) ++correct;
  }
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const double tp = r.confusion(c, c);
    double pred_c = 0.0, true_c = 0.0;
    for (int o = 0; o < num_classes; ++o) {
      pred_c += r.confusion(o, c);
      true_c += r.confusion(c, o);
    }
    const double precision = pred_c > 0.0 ? tp / pred_c : 0.0;
    const double recall = true_c > 0.0 ? tp / true_c : 0.0;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                               : 0.0;
    p_sum += precision;
    r_sum += recall;
    f_sum += f1;
  }
  const double C = num_classes > 0 ? num_classes : 1;
  r.accuracy = truth.empty() ? 0.0 : 100.0 * static_cast<double>(correct) /
                                         static_cast<double>(truth.size());
  r.macro_precision = 100.0 * p_sum / C;
  r.macro_recall = 100.0 * r_sum / C;
  r.macro_f1 = 100.0 * f_sum / C;
  return r;
}

ClassificationReport evaluate_classification(const ClassifierModel& model,
                                             const MatrixD& features,
                                             std::span<const int> labels) {
  std::vector<int> predicted(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) predicted[r] = predict(model, features.row(r));
  return score_predictions(labels, predicted, model.num_classes);
}

void write_classification_report(std::ostream& out, const ClassificationReport& report,
                                 std::span<const std::string> class_names) {
  out << std::fixed << std::setprecision(2);
  out << "confusion (rows = truth, cols = predicted)\n";
  for (std::size_t c = 0; c < report.confusion.rows(); ++c) {
    out << "  " << std::setw(24) << std::left
        << (c < class_names.size() ? class_names[c] : std::to_string(c)) << std::right;
    for (std::size_t o = 0; o < report.confusion.cols(); ++o) {
      out << ' ' << std::setw(6) << report.confusion(c, o);
    }
    out << '\n';
  }
  out << "  accuracy  precision  recall  f1\n";
  out << "  " << std::setw(8) << report.accuracy << "  " << std::setw(9)
      << report.macro_precision << "  " << std::setw(6) << report.macro_recall << "  "
      << std::setw(5) << report.macro_f1 << '\n';
  out << "accuracy=" << report.accuracy << '\n';
  out << "macro_precision=" << report.macro_precision << '\n';
  out << "macro_recall=" << report.macro_recall << '\n';
  out << "macro_f1=" << report.macro_f1 << '\n';
  out.unsetf(std::ios::floatfield);
}

void export_sparse_features(std::ostream& out, const MatrixD& features,
                            std::span<const int> labels) {
  if (labels.size() != features.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "one label per feature row required");
  }
  out << std::setprecision(17);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    out << labels[r];
    const auto row = features.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] != 0.0) out << ' ' << (i + 1) << ':' << row[i];
    }
    out << '\n';
  }
}

}  // namespace ltsg
