#include "ltsg/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "ltsg/error.hpp"
#include "ltsg/io.hpp"
#include "ltsg/random.hpp"

namespace ltsg {

namespace {

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void check_dims(const EmbeddingSet& emb, const HuffmanTree& tree) {
  if (emb.word_vecs.rows() != tree.num_words() ||
      emb.inner_vecs.rows() != tree.num_inner() ||
      emb.inner_vecs.cols() != emb.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "embedding shapes do not match the tree");
  }
}

// Scratch buffers reused across steps by one worker.
struct Workspace {
  std::vector<double> grad_input;
  std::vector<double> path_grad;
  std::vector<double> phi_sum;  // per-topic partial sums for one center token
};

// Word-term update for one pair.
void word_term(WordId center, WordId context, double lr, EmbeddingSet& emb,
               const HuffmanTree& tree, Workspace& ws) {
  auto input = emb.word_vecs.row(center);
  const auto path = tree.path(context);
  const auto code = tree.code(context);
  ws.grad_input.assign(input.size(), 0.0);
  for (std::size_t i = 0; i < path.size(); ++i) {
    auto node = emb.inner_vecs.row(path[i]);
    const double g = 1.0 - code[i] - sigmoid(dot(input, node));
    axpy(g, node, ws.grad_input);
    axpy(lr * g, input, node);
  }
  axpy(lr, ws.grad_input, input);
}

// Topic-term update for one pair; adds this pair's phi gradient terms to
// ws.phi_sum (one slot per topic when `full`, otherwise slot `topic`).
void topic_term(std::span<const double> global_topic, int topic, WordId context,
                double lr, EmbeddingSet& emb, const HuffmanTree& tree, bool full,
                Workspace& ws) {
  const auto path = tree.path(context);
  const auto code = tree.code(context);
  const double scale = 1.0 / static_cast<double>(path.size());
  const auto K = emb.topic_vecs.rows();
  for (std::size_t i = 0; i < path.size(); ++i) {
    auto node = emb.inner_vecs.row(path[i]);
    const double g = 1.0 - code[i] - sigmoid(dot(global_topic, node));
    if (full) {
      for (std::size_t k = 0; k < K; ++k) {
        ws.phi_sum[k] += scale * g * dot(emb.topic_vecs.row(k), node);
      }
    } else {
      ws.phi_sum[topic] += scale * g * dot(emb.topic_vecs.row(topic), node);
    }
    axpy(lr * g, global_topic, node);
  }
}

void flush_phi_sum(WordId center, int topic, bool full, Workspace& ws,
                   PhiGradAccumulator& acc) {
  if (full) {
    for (std::size_t k = 0; k < ws.phi_sum.size(); ++k) {
      acc.add(static_cast<int>(k), center, ws.phi_sum[k]);
      ws.phi_sum[k] = 0.0;
    }
  } else {
    acc.add(topic, center, ws.phi_sum[topic]);
    ws.phi_sum[topic] = 0.0;
  }
  acc.note_token();
}

}  // namespace

bool EmbeddingSet::all_finite() const {
  auto finite = [](const MatrixD& m) {
    return std::all_of(m.data().begin(), m.data().end(),
                       [](double v) { return std::isfinite(v); });
  };
  return finite(word_vecs) && finite(inner_vecs) && finite(topic_vecs);
}

EmbeddingSet init_embeddings(std::size_t vocab_size, std::size_t num_topics,
                             std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorKind::kInvalidConfig, "embedding dimension must be >= 1");
  EmbeddingSet emb;
  emb.word_vecs = MatrixD(vocab_size, dim);
  emb.inner_vecs = MatrixD(vocab_size > 0 ? vocab_size - 1 : 0, dim, 0.0);
  emb.topic_vecs = MatrixD(num_topics, dim, 0.0);
  Rng rng(seed);
  const double half = 0.5 / static_cast<double>(dim);
  for (double& v : emb.word_vecs.data()) v = (2.0 * uniform01(rng) - 1.0) * half;
  return emb;
}

MatrixD compute_topic_embeddings(const TopicState& state,
                                 const EncodedCorpus& corpus,
                                 const MatrixD& word_vecs) {
  const auto K = static_cast<std::size_t>(state.num_topics);
  const auto d = word_vecs.cols();
  MatrixD sums(K, d, 0.0);
  for (std::size_t m = 0; m < corpus.docs.size(); ++m) {
    const auto& doc = corpus.docs[m];
    for (std::size_t n = 0; n < doc.size(); ++n) {
      axpy(1.0, word_vecs.row(doc[n]), sums.row(state.z[m][n]));
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    const auto count = state.topic_totals[k];
    if (count == 0) continue;
    for (double& v : sums.row(k)) v /= static_cast<double>(count);
  }
  return sums;
}

std::vector<double> global_topic_vector(WordId w, const Phi& phi,
                                        const MatrixD& topic_vecs) {
  std::vector<double> out(topic_vecs.cols(), 0.0);
  for (std::size_t k = 0; k < topic_vecs.rows(); ++k) {
    axpy(phi(k, w), topic_vecs.row(k), out);
  }
  return out;
}

MatrixD global_topic_vectors(const Phi& phi, const MatrixD& topic_vecs) {
  const auto W = phi.vocab_size();
  MatrixD out(W, topic_vecs.cols(), 0.0);
  for (std::size_t k = 0; k < topic_vecs.rows(); ++k) {
    const auto t = topic_vecs.row(k);
    for (std::size_t w = 0; w < W; ++w) axpy(phi(k, w), t, out.row(w));
  }
  return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double hs_log_prob(WordId output, std::span<const double> input,
                   const HuffmanTree& tree, const MatrixD& inner_vecs) {
  const auto path = tree.path(output);
  const auto code = tree.code(output);
  double total = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double s = dot(input, inner_vecs.row(path[i]));
    total += log_sigmoid(code[i] ? -s : s);
  }
  return total;
}

std::vector<double> hs_path_gradient(WordId output, std::span<const double> input,
                                     const HuffmanTree& tree,
                                     const MatrixD& inner_vecs) {
  const auto path = tree.path(output);
  const auto code = tree.code(output);
  std::vector<double> g(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    g[i] = 1.0 - code[i] - sigmoid(dot(input, inner_vecs.row(path[i])));
  }
  return g;
}

double phi_partial(std::span<const double> path_gradient, WordId output,
                   std::span<const double> topic_vec, const HuffmanTree& tree,
                   const MatrixD& inner_vecs) {
  const auto path = tree.path(output);
  double total = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    total += path_gradient[i] * dot(topic_vec, inner_vecs.row(path[i]));
  }
  return total;
}

void PhiGradAccumulator::add(int topic, WordId word, double value) {
  entries_[key(topic, word)] += value;
}

void PhiGradAccumulator::merge(const PhiGradAccumulator& other) {
  if (vocab_size_ == 0) vocab_size_ = other.vocab_size_;
  for (const auto& e : other.entries()) add(e.topic, e.word, e.value);
  token_contributions_ += other.token_contributions_;
}

double PhiGradAccumulator::get(int topic, WordId word) const {
  auto it = entries_.find(key(topic, word));
  return it == entries_.end() ? 0.0 : it->second;
}

bool PhiGradAccumulator::contains(int topic, WordId word) const {
  return entries_.count(key(topic, word)) > 0;
}

std::vector<PhiGradAccumulator::Entry> PhiGradAccumulator::entries() const {
  std::vector<std::pair<std::uint64_t, double>> sorted(entries_.begin(), entries_.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Entry> out;
  out.reserve(sorted.size());
  for (const auto& [k, v] : sorted) {
    out.push_back({static_cast<int>(k / vocab_size_),
                   static_cast<WordId>(k % vocab_size_), v});
  }
  return out;
}

void sgd_step(const EncodedCorpus& corpus, const TopicState* state, std::size_t m,
              std::size_t n, WordId context, TermMode mode, double learning_rate,
              EmbeddingSet& emb, const Phi* phi, const HuffmanTree& tree,
              PhiGradAccumulator* phi_acc, const StepOptions& options) {
  check_dims(emb, tree);
  if (m >= corpus.docs.size() || n >= corpus.docs[m].size()) {
    throw Error(ErrorKind::kInvalidArgument, "center token out of range");
  }
  const WordId center = corpus.docs[m][n];
  Workspace ws;
  if (mode == TermMode::kWord) {
    word_term(center, context, learning_rate, emb, tree, ws);
    return;
  }
  if (state == nullptr || phi == nullptr || phi_acc == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "topic term needs state, phi and accumulator");
  }
  const int topic = state->z[m][n];
  const auto global = global_topic_vector(center, *phi, emb.topic_vecs);
  ws.phi_sum.assign(emb.topic_vecs.rows(), 0.0);
  topic_term(global, topic, context, learning_rate, emb, tree, options.full_phi_grad, ws);
  if (options.full_phi_grad) {
    for (std::size_t k = 0; k < ws.phi_sum.size(); ++k) {
      phi_acc->add(static_cast<int>(k), center, ws.phi_sum[k]);
    }
  } else {
    phi_acc->add(topic, center, ws.phi_sum[topic]);
  }
}

std::size_t count_pairs(std::size_t length, int window) {
  std::size_t pairs = 0;
  const auto c = static_cast<std::size_t>(std::max(window, 0));
  for (std::size_t n = 0; n < length; ++n) {
    const std::size_t left = std::min(n, c);
    const std::size_t right = std::min(length - 1 - n, c);
    pairs += left + right;
  }
  return pairs;
}

EpochResult train_epoch(const EncodedCorpus& corpus, const TopicState* state,
                        const Phi* phi, EmbeddingSet& emb, const HuffmanTree& tree,
                        const EpochOptions& options) {
  check_dims(emb, tree);
  if (options.window < 1) throw Error(ErrorKind::kInvalidConfig, "window must be >= 1");
  const bool ltsg = options.mode == TrainMode::kLtsg;
  MatrixD global;
  if (ltsg) {
    if (state == nullptr || phi == nullptr) {
      throw Error(ErrorKind::kInvalidArgument, "ltsg epoch needs topic state and phi");
    }
    global = global_topic_vectors(*phi, emb.topic_vecs);
  }
  const double lr0 = options.learning_rate;
  const double lr_min =
      options.min_learning_rate < 0.0 ? lr0 * 1e-4 : options.min_learning_rate;
  const std::size_t total_tokens = std::max<std::size_t>(corpus.total_tokens, 1);
  const int workers = std::max(1, options.workers);
  std::atomic<std::size_t> processed{0};

  auto run_shard = [&](std::size_t doc_begin, std::size_t doc_end, EpochResult& out) {
    Workspace ws;
    ws.phi_sum.assign(emb.topic_vecs.rows(), 0.0);
    out.phi_grad = PhiGradAccumulator(tree.num_words());
    std::size_t local = 0;
    double lr = lr0;
    for (std::size_t m = doc_begin; m < doc_end; ++m) {
      const auto& doc = corpus.docs[m];
      const auto len = doc.size();
      for (std::size_t n = 0; n < len; ++n) {
        if (++local % 1024 == 0) {
          const auto done = processed.fetch_add(1024, std::memory_order_relaxed) + 1024;
          lr = std::max(lr0 * (1.0 - static_cast<double>(done) / total_tokens), lr_min);
        }
        const WordId center = doc[n];
        const int topic = ltsg ? state->z[m][n] : 0;
        const std::size_t lo = n >= static_cast<std::size_t>(options.window) ? n - options.window : 0;
        const std::size_t hi = std::min(len - 1, n + options.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == n) continue;
          word_term(center, doc[j], lr, emb, tree, ws);
          if (ltsg) {
            topic_term(global.row(center), topic, doc[j], lr, emb, tree,
                       options.full_phi_grad, ws);
          }
          ++out.pairs;
        }
        if (ltsg) flush_phi_sum(center, topic, options.full_phi_grad, ws, out.phi_grad);
        ++out.tokens;
      }
    }
  };

  EpochResult result;
  result.phi_grad = PhiGradAccumulator(tree.num_words());
  if (workers == 1 || corpus.docs.size() < 2) {
    run_shard(0, corpus.docs.size(), result);
  } else {
    // contiguous shards of roughly equal token counts
    std::vector<std::size_t> bounds{0};
    const std::size_t per = total_tokens / workers + 1;
    std::size_t acc = 0;
    for (std::size_t m = 0; m < corpus.docs.size(); ++m) {
      acc += corpus.docs[m].size();
      if (acc >= per * bounds.size() && bounds.size() < static_cast<std::size_t>(workers)) {
        bounds.push_back(m + 1);
      }
    }
    if (bounds.back() != corpus.docs.size()) bounds.push_back(corpus.docs.size());
    std::vector<EpochResult> parts(bounds.size() - 1);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      threads.emplace_back(run_shard, bounds[i], bounds[i + 1], std::ref(parts[i]));
    }
    for (auto& t : threads) t.join();
    for (const auto& part : parts) {
      result.phi_grad.merge(part.phi_grad);
      result.tokens += part.tokens;
      result.pairs += part.pairs;
    }
  }
  if (!emb.all_finite()) {
    throw Error(ErrorKind::kInvalidArgument, "non-finite embedding after epoch");
  }
  return result;
}

double average_log_likelihood(const EncodedCorpus& corpus, const TopicState* state,
                              const Phi* phi, const EmbeddingSet& emb,
                              const HuffmanTree& tree, int window, TrainMode mode) {
  const bool ltsg = mode == TrainMode::kLtsg;
  MatrixD global;
  if (ltsg) global = global_topic_vectors(*phi, emb.topic_vecs);
  (void)state;
  double total = 0.0;
  for (const auto& doc : corpus.docs) {
    const auto len = doc.size();
    for (std::size_t n = 0; n < len; ++n) {
      const std::size_t lo = n >= static_cast<std::size_t>(window) ? n - window : 0;
      const std::size_t hi = std::min(len - 1, n + window);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == n) continue;
        total += hs_log_prob(doc[j], emb.word_vecs.row(doc[n]), tree, emb.inner_vecs);
        if (ltsg) total += hs_log_prob(doc[j], global.row(doc[n]), tree, emb.inner_vecs);
      }
    }
  }
  return corpus.total_tokens == 0 ? 0.0 : total / static_cast<double>(corpus.total_tokens);
}

double dynamic_learning_rate(double xi, double n) {
  if (n <= 1.0) return 0.0;
  return xi * std::log(n) / n;
}

void project_row_to_floor(std::span<double> row, double floor) {
  const std::size_t n = row.size();
  if (n == 0) return;
  std::vector<char> clamped(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(row[i]) || row[i] < floor) clamped[i] = 1;
  }
  for (;;) {
    double free_sum = 0.0;
    std::size_t n_clamped = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (clamped[i]) {
        ++n_clamped;
      } else {
        free_sum += row[i];
      }
    }
    const double target = 1.0 - static_cast<double>(n_clamped) * floor;
    if (n_clamped == n || !(free_sum > 0.0) || !(target > 0.0)) {
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(n));
      return;
    }
    const double scale = target / free_sum;
    bool grew = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!clamped[i] && row[i] * scale < floor) {
        clamped[i] = 1;
        grew = true;
      }
    }
    if (!grew) {
      for (std::size_t i = 0; i < n; ++i) row[i] = clamped[i] ? floor : row[i] * scale;
      return;
    }
  }
}

Phi apply_phi_update(const Phi& phi, const PhiGradAccumulator& acc, double xi,
                     const MatrixI& topic_word_counts) {
  if (topic_word_counts.rows() != phi.num_topics() ||
      topic_word_counts.cols() != phi.vocab_size()) {
    throw Error(ErrorKind::kDimensionMismatch, "count matrix does not match phi");
  }
  Phi out = phi;
  for (const auto& e : acc.entries()) {
    const double n = static_cast<double>(topic_word_counts(e.topic, e.word));
    const double rate = dynamic_learning_rate(xi, n);
    out.values(e.topic, e.word) += rate * e.value;
  }
  for (std::size_t k = 0; k < out.num_topics(); ++k) {
    project_row_to_floor(out.values.row(k), kPhiFloor);
  }
  return out;
}

std::string topic_token(int k) { return "__topic_" + std::to_string(k); }

void save_word2vec_text(const std::filesystem::path& path,
                        std::span<const std::string> names, const MatrixD& vecs) {
  if (names.size() != vecs.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "name/vector count mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << vecs.rows() << ' ' << vecs.cols() << '\n';
  for (std::size_t r = 0; r < vecs.rows(); ++r) {
    out << names[r];
    for (double v : vecs.row(r)) out << ' ' << io::format_double(v);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

NamedVectors load_word2vec_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kTruncatedFile, path.string() + ": missing header");
  }
  std::size_t count = 0;
  std::size_t dim = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> count >> dim)) {
      throw Error(ErrorKind::kMalformedFile, path.string() + ": bad header");
    }
  }
  NamedVectors out;
  out.vecs = MatrixD(count, dim);
  out.names.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    if (!std::getline(in, line)) {
      throw Error(ErrorKind::kTruncatedFile,
                  path.string() + ": expected " + std::to_string(count) + " vectors");
    }
    std::istringstream ss(line);
    std::string name;
    ss >> name;
    out.names.push_back(name);
    std::string tok;
    std::size_t c = 0;
    while (ss >> tok) {
      if (c >= dim) {
        throw Error(ErrorKind::kDimensionMismatch, path.string() + ": row longer than dim");
      }
      out.vecs(r, c++) = io::parse_double(tok, path.string());
    }
    if (c != dim) {
      throw Error(ErrorKind::kDimensionMismatch, path.string() + ": row shorter than dim");
    }
  }
  if (std::getline(in, line) && !line.empty()) {
    throw Error(ErrorKind::kDimensionMismatch, path.string() + ": more rows than header");
  }
  return out;
}

}  // namespace ltsg
