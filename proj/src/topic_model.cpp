#include "ltsg/topic_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ltsg/error.hpp"
#include "ltsg/io.hpp"

namespace ltsg {

namespace {

void check_token(const EncodedCorpus& corpus, const TopicState& state,
                 std::size_t m, std::size_t n) {
  if (m >= corpus.docs.size() || n >= corpus.docs[m].size() ||
      m >= state.z.size() || n >= state.z[m].size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "token (" + std::to_string(m) + ", " + std::to_string(n) +
                    ") out of range");
  }
}

// Smoothed document factor with token (m, n) excluded. The denominator is the
// same for every k but is kept so the vector is the literal conditional
// before normalization.
double doc_factor(const TopicState& state, std::size_t m, int k, int excluded_k,
                  double alpha) {
  const int K = state.num_topics;
  const double len = static_cast<double>(state.z[m].size()) - 1.0;
  const double n_mk = state.doc_topic(m, k) - (k == excluded_k ? 1 : 0);
  return (n_mk + alpha) / (len + K * alpha);
}

void normalize(std::vector<double>& p) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= total;
}

}  // namespace

void Hyperparams::validate() const {
  if (num_topics < 1) throw Error(ErrorKind::kInvalidConfig, "K must be >= 1");
  if (!(alpha > 0.0)) throw Error(ErrorKind::kInvalidConfig, "alpha must be > 0");
  if (!(beta > 0.0)) throw Error(ErrorKind::kInvalidConfig, "beta must be > 0");
}

std::size_t TopicState::total_tokens() const {
  return static_cast<std::size_t>(
      std::accumulate(topic_totals.begin(), topic_totals.end(), std::int64_t{0}));
}

TopicState TopicState::from_assignments(const EncodedCorpus& corpus,
                                        int num_topics, int vocab_size,
                                        std::vector<std::vector<int>> z) {
  if (z.size() != corpus.docs.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "assignment/document count mismatch");
  }
  TopicState s;
  s.num_topics = num_topics;
  s.vocab_size = vocab_size;
  s.topic_word = MatrixI(num_topics, vocab_size, 0);
  s.doc_topic = MatrixI(corpus.docs.size(), num_topics, 0);
  s.topic_totals.assign(num_topics, 0);
  for (std::size_t m = 0; m < corpus.docs.size(); ++m) {
    const auto& doc = corpus.docs[m];
    if (z[m].size() != doc.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "assignment/token count mismatch");
    }
    for (std::size_t n = 0; n < doc.size(); ++n) {
      const int k = z[m][n];
      const WordId w = doc[n];
      if (k < 0 || k >= num_topics || w < 0 || w >= vocab_size) {
        throw Error(ErrorKind::kDimensionMismatch, "topic or word id out of range");
      }
      ++s.topic_word(k, w);
      ++s.doc_topic(m, k);
      ++s.topic_totals[k];
    }
  }
  s.z = std::move(z);
  return s;
}

bool TopicState::counts_consistent(const EncodedCorpus& corpus) const {
  try {
    return from_assignments(corpus, num_topics, vocab_size, z) == *this;
  } catch (const Error&) {
    return false;
  }
}

void validate_phi(const Phi& phi) {
  for (double v : phi.values.data()) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error(ErrorKind::kInvalidPhi, "phi has a non-positive or non-finite entry");
    }
  }
}

TopicState init_assignments(const EncodedCorpus& corpus, int num_topics,
                            int vocab_size, Rng& rng) {
  if (num_topics < 1) throw Error(ErrorKind::kInvalidConfig, "K must be >= 1");
  std::vector<std::vector<int>> z(corpus.docs.size());
  for (std::size_t m = 0; m < corpus.docs.size(); ++m) {
    z[m].resize(corpus.docs[m].size());
    for (int& k : z[m]) {
      k = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(num_topics)));
    }
  }
  return TopicState::from_assignments(corpus, num_topics, vocab_size, std::move(z));
}

TopicState init_assignments(const EncodedCorpus& corpus, int num_topics,
                            int vocab_size, std::uint64_t seed) {
  Rng rng(seed);
  return init_assignments(corpus, num_topics, vocab_size, rng);
}

std::vector<double> lda_conditional(const TopicState& state,
                                    const EncodedCorpus& corpus,
                                    const Hyperparams& hyper, std::size_t m,
                                    std::size_t n) {
  check_token(corpus, state, m, n);
  const int K = state.num_topics;
  const WordId w = corpus.docs[m][n];
  const int old = state.z[m][n];
  const double w_beta = state.vocab_size * hyper.beta;
  std::vector<double> p(K);
  for (int k = 0; k < K; ++k) {
    const int own = k == old ? 1 : 0;
    const double n_kw = state.topic_word(k, w) - own;
    const double n_k = static_cast<double>(state.topic_totals[k] - own);
    p[k] = (n_kw + hyper.beta) / (n_k + w_beta) *
           doc_factor(state, m, k, old, hyper.alpha);
  }
  normalize(p);
  return p;
}

std::vector<double> ltsg_conditional(const TopicState& state,
                                     const EncodedCorpus& corpus, const Phi& phi,
                                     double alpha, std::size_t m, std::size_t n) {
  check_token(corpus, state, m, n);
  const int K = state.num_topics;
  const WordId w = corpus.docs[m][n];
  if (phi.num_topics() != static_cast<std::size_t>(K) ||
      static_cast<std::size_t>(w) >= phi.vocab_size()) {
    throw Error(ErrorKind::kDimensionMismatch, "phi shape does not match state");
  }
  const int old = state.z[m][n];
  std::vector<double> p(K);
  for (int k = 0; k < K; ++k) {
    const double phi_kw = phi(k, w);
    if (!std::isfinite(phi_kw) || phi_kw <= 0.0) {
      throw Error(ErrorKind::kInvalidPhi,
                  "phi[" + std::to_string(k) + "][" + std::to_string(w) +
                      "] is not strictly positive");
    }
    p[k] = phi_kw * doc_factor(state, m, k, old, alpha);
  }
  normalize(p);
  return p;
}

std::size_t sample_discrete(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(rng) * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cum += weights[k];
    if (u < cum) return k;
  }
  // u == total only through rounding; land on the last positive weight
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return k;
  }
  return weights.size() - 1;
}

void gibbs_sweep(TopicState& state, const EncodedCorpus& corpus,
                 SamplingRule rule, const Hyperparams& hyper, const Phi* phi,
                 Rng& rng) {
  const int K = state.num_topics;
  const int W = state.vocab_size;
  const double w_beta = W * hyper.beta;
  const double alpha = hyper.alpha;

  // phi transposed to W x K so a token's column is contiguous
  std::vector<double> phi_t;
  if (rule == SamplingRule::kLtsg) {
    if (phi == nullptr) {
      throw Error(ErrorKind::kInvalidArgument, "ltsg sampling rule requires phi");
    }
    if (phi->num_topics() != static_cast<std::size_t>(K) ||
        phi->vocab_size() != static_cast<std::size_t>(W)) {
      throw Error(ErrorKind::kDimensionMismatch, "phi shape does not match state");
    }
    validate_phi(*phi);
    phi_t.resize(static_cast<std::size_t>(W) * K);
    for (int k = 0; k < K; ++k) {
      for (int w = 0; w < W; ++w) phi_t[static_cast<std::size_t>(w) * K + k] = (*phi)(k, w);
    }
  }

  std::vector<double> cum(K);
  for (std::size_t m = 0; m < corpus.docs.size(); ++m) {
    const auto& doc = corpus.docs[m];
    auto& zm = state.z[m];
    auto doc_counts = state.doc_topic.row(m);
    for (std::size_t n = 0; n < doc.size(); ++n) {
      const WordId w = doc[n];
      int k = zm[n];
      --state.topic_word(k, w);
      --doc_counts[k];
      --state.topic_totals[k];

      double total = 0.0;
      if (rule == SamplingRule::kLda) {
        for (int j = 0; j < K; ++j) {
          total += (state.topic_word(j, w) + hyper.beta) /
                   (static_cast<double>(state.topic_totals[j]) + w_beta) *
                   (doc_counts[j] + alpha);
          cum[j] = total;
        }
      } else {
        const double* col = &phi_t[static_cast<std::size_t>(w) * K];
        for (int j = 0; j < K; ++j) {
          total += col[j] * (doc_counts[j] + alpha);
          cum[j] = total;
        }
      }
      const double u = uniform01(rng) * total;
      k = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
      if (k >= K) k = K - 1;

      zm[n] = k;
      ++state.topic_word(k, w);
      ++doc_counts[k];
      ++state.topic_totals[k];
    }
  }
}

Phi estimate_phi(const TopicState& state, double beta) {
  const int K = state.num_topics;
  const int W = state.vocab_size;
  Phi phi{MatrixD(K, W)};
  for (int k = 0; k < K; ++k) {
    const double denom = static_cast<double>(state.topic_totals[k]) + W * beta;
    for (int w = 0; w < W; ++w) phi.values(k, w) = (state.topic_word(k, w) + beta) / denom;
  }
  return phi;
}

Theta estimate_theta(const TopicState& state, double alpha) {
  const int K = state.num_topics;
  const std::size_t M = state.num_docs();
  Theta theta{MatrixD(M, K)};
  for (std::size_t m = 0; m < M; ++m) {
    const double denom = static_cast<double>(state.z[m].size()) + K * alpha;
    for (int k = 0; k < K; ++k) theta.values(m, k) = (state.doc_topic(m, k) + alpha) / denom;
  }
  return theta;
}

FoldInResult fold_in_document(std::span<const WordId> tokens, const Phi& phi,
                              double alpha, const FoldInOptions& options,
                              Rng& rng) {
  const auto K = static_cast<int>(phi.num_topics());
  const auto W = static_cast<WordId>(phi.vocab_size());
  if (options.sweeps < 1) {
    throw Error(ErrorKind::kInvalidArgument, "fold-in needs at least one sweep");
  }
  const int burn_in = options.burn_in < 0 ? options.sweeps / 2
                                          : std::min(options.burn_in, options.sweeps - 1);
  FoldInResult result;
  for (WordId w : tokens) {
    if (w >= 0 && w < W) result.tokens.push_back(w);
  }
  if (result.tokens.empty()) {
    result.distribution.assign(K, 1.0 / K);
    return result;
  }
  const auto N = result.tokens.size();
  auto& z = result.assignments;
  z.resize(N);
  std::vector<int> counts(K, 0);
  for (auto& k : z) {
    k = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(K)));
    ++counts[k];
  }
  std::vector<double> accumulated(K, 0.0);
  std::vector<double> cum(K);
  for (int sweep = 0; sweep < options.sweeps; ++sweep) {
    for (std::size_t n = 0; n < N; ++n) {
      const WordId w = result.tokens[n];
      --counts[z[n]];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        const double p = phi(k, w);
        if (!(p > 0.0) || !std::isfinite(p)) {
          throw Error(ErrorKind::kInvalidPhi, "phi has a non-positive entry");
        }
        total += p * (counts[k] + alpha);
        cum[k] = total;
      }
      const double u = uniform01(rng) * total;
      int k = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
      if (k >= K) k = K - 1;
      z[n] = k;
      ++counts[k];
    }
    if (sweep >= burn_in) {
      for (int k = 0; k < K; ++k) accumulated[k] += counts[k];
    }
  }
  const double kept = options.sweeps - burn_in;
  result.distribution.resize(K);
  const double denom = static_cast<double>(N) + K * alpha;
  for (int k = 0; k < K; ++k) {
    result.distribution[k] = (accumulated[k] / kept + alpha) / denom;
  }
  return result;
}

void save_assignments(const EncodedCorpus& corpus, const TopicState& state,
                      const std::filesystem::path& path) {
  if (corpus.docs.size() != state.z.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "assignment/document count mismatch");
  }
  io::BinaryWriter out(path);
  out.u64(corpus.docs.size());
  out.u64(static_cast<std::uint64_t>(state.num_topics));
  out.u64(static_cast<std::uint64_t>(state.vocab_size));
  out.u64(corpus.total_tokens);
  for (std::size_t m = 0; m < corpus.docs.size(); ++m) {
    const auto& doc = corpus.docs[m];
    out.u32(static_cast<std::uint32_t>(doc.size()));
    for (std::size_t n = 0; n < doc.size(); ++n) {
      out.u32(static_cast<std::uint32_t>(doc[n]));
      out.u32(static_cast<std::uint32_t>(state.z[m][n]));
    }
  }
  out.close();
}

LoadedAssignments load_assignments(const std::filesystem::path& path) {
  io::BinaryReader in(path);
  const auto M = in.u64();
  const auto K = in.u64();
  const auto W = in.u64();
  const auto total = in.u64();
  if (K < 1 || K > (1u << 20) || W > (1u << 30)) {
    throw Error(ErrorKind::kMalformedFile, path.string() + ": implausible header");
  }
  LoadedAssignments out;
  std::vector<std::vector<int>> z;
  std::uint64_t seen = 0;
  for (std::uint64_t m = 0; m < M; ++m) {
    const auto len = in.u32();
    if (len > total - seen) {
      throw Error(ErrorKind::kDimensionMismatch,
                  path.string() + ": document length exceeds header total");
    }
    auto& doc = out.corpus.docs.emplace_back(len);
    auto& zm = z.emplace_back(len);
    for (std::uint32_t n = 0; n < len; ++n) {
      doc[n] = static_cast<WordId>(in.u32());
      zm[n] = static_cast<int>(in.u32());
    }
    seen += len;
    out.corpus.source_index.push_back(m);
  }
  if (!in.at_end()) {
    throw Error(ErrorKind::kMalformedFile, path.string() + ": trailing bytes");
  }
  if (seen != total) {
    throw Error(ErrorKind::kDimensionMismatch,
                path.string() + ": token total does not match header");
  }
  out.corpus.total_tokens = total;
  out.state = TopicState::from_assignments(out.corpus, static_cast<int>(K),
                                           static_cast<int>(W), std::move(z));
  return out;
}

}  // namespace ltsg
