#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ltsg/error.hpp"
#include "ltsg/topic_model.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace ltsg;

namespace {

EncodedCorpus corpus_of(std::vector<std::vector<WordId>> docs) {
  EncodedCorpus c;
  for (std::size_t m = 0; m < docs.size(); ++m) {
    c.total_tokens += docs[m].size();
    c.source_index.push_back(m);
  }
  c.docs = std::move(docs);
  return c;
}

oracle::Docs as_int_docs(const EncodedCorpus& c) {
  oracle::Docs out;
  for (const auto& d : c.docs) out.emplace_back(d.begin(), d.end());
  return out;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_SUITE("topic_model") {

TEST_CASE("init_assignments") {
  std::mt19937_64 gen(1);
  const auto c = testing::random_corpus(gen, 6, 5, 1, 7);
  const auto one = init_assignments(c, 1, 6, 5);
  CHECK(one.topic_totals[0] == static_cast<std::int64_t>(c.total_tokens));
  for (const auto& zs : one.z) {
    for (int z : zs) CHECK(z == 0);
  }
  const auto a = init_assignments(c, 3, 6, 42);
  CHECK(a == init_assignments(c, 3, 6, 42));
  CHECK(a.counts_consistent(c));
  CHECK(a.total_tokens() == c.total_tokens);

  const auto empty = init_assignments(EncodedCorpus{}, 4, 6, 1);
  CHECK(empty.num_docs() == 0);
  CHECK(std::accumulate(empty.topic_totals.begin(), empty.topic_totals.end(), std::int64_t{0}) == 0);
}

TEST_CASE("lda_conditional hand example") {
  // Held token is doc 0, position 2 (word 0). Without it: topic 0 has word 0
  // twice out of 4 tokens, topic 1 has it zero times out of 2, and doc 0 has
  // one token in each topic.
  const auto c = corpus_of({{1, 1, 0}, {0, 0, 1, 1}, {}});
  auto st = TopicState::from_assignments(c, 2, 2, {{0, 1, 0}, {0, 0, 0, 1}, {}});
  const auto p = lda_conditional(st, c, {2, 0.01, 0.1}, 0, 2);
  CHECK(p[0] == doctest::Approx(0.9167).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.0833).epsilon(1e-3));
  const double w0 = 2.1 / 4.2, w1 = 0.1 / 2.2;
  CHECK(std::abs(p[0] - w0 / (w0 + w1)) < 1e-14);
}

TEST_CASE("lda_conditional symmetry and range errors") {
  const auto c = corpus_of({{0, 0, 0}});
  auto st = TopicState::from_assignments(c, 2, 1, {{0, 1, 0}});
  const auto p = lda_conditional(st, c, {2, 0.01, 0.1}, 0, 2);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  auto one = TopicState::from_assignments(c, 1, 1, {{0, 0, 0}});
  CHECK(lda_conditional(one, c, {1, 0.01, 0.1}, 0, 1) == std::vector<double>{1.0});
  CHECK_THROWS_AS(lda_conditional(st, c, {2, 0.01, 0.1}, 2, 0), Error);
  CHECK_THROWS_AS(lda_conditional(st, c, {2, 0.01, 0.1}, 0, 5), Error);
}

TEST_CASE("lda_conditional matches the collapsed-joint oracle") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 1 + static_cast<int>(gen() % 3);
    const int W = 1 + static_cast<int>(gen() % 4);
    const int M = 1 + static_cast<int>(gen() % 3);
    const auto c = testing::random_corpus(gen, W, M, 1, 4);
    std::vector<std::vector<int>> z;
    for (const auto& d : c.docs) {
      std::vector<int> zs(d.size());
      for (int& v : zs) v = static_cast<int>(gen() % K);
      z.push_back(zs);
    }
    const double alpha = 0.01 + 0.5 * (gen() % 100) / 100.0;
    const double beta = 0.05 + 0.5 * (gen() % 100) / 100.0;
    auto st = TopicState::from_assignments(c, K, W, z);
    for (std::size_t m = 0; m < c.docs.size(); ++m) {
      for (std::size_t n = 0; n < c.docs[m].size(); ++n) {
        const auto got = lda_conditional(st, c, {K, alpha, beta}, m, n);
        const auto want = oracle::collapsed_conditional(as_int_docs(c), z, K, W, alpha, beta, m, n);
        for (int k = 0; k < K; ++k) CHECK(std::abs(got[k] - want[k]) < 1e-12);
        CHECK(std::abs(sum(got) - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("ltsg_conditional examples") {
  const auto c = corpus_of({{0, 1, 1, 1, 0}});
  Phi phi{MatrixD(2, 2, 0.5)};
  auto st = TopicState::from_assignments(c, 2, 2, {{0, 0, 1, 1, 0}});
  // held token 4 excluded: doc counts (2, 2) -> uniform with uniform phi
  auto p = ltsg_conditional(st, c, phi, 0.01, 0, 4);
  CHECK(p[0] == doctest::Approx(0.5));

  phi.values(0, 0) = 0.9;
  phi.values(1, 0) = 0.1;
  phi.values(0, 1) = 0.1;
  phi.values(1, 1) = 0.9;
  p = ltsg_conditional(st, c, phi, 0.01, 0, 4);
  CHECK(std::abs(p[0] - 0.9) < 1e-12);

  phi.values(0, 0) = 0.6;
  phi.values(1, 0) = 0.4;
  phi.values(0, 1) = 0.4;
  phi.values(1, 1) = 0.6;
  st = TopicState::from_assignments(c, 2, 2, {{0, 0, 0, 1, 0}});
  p = ltsg_conditional(st, c, phi, 0.01, 0, 4);
  const double a = 0.6 * 3.01, b = 0.4 * 1.01;
  CHECK(std::abs(p[0] - a / (a + b)) < 1e-12);
  CHECK(p[0] == doctest::Approx(0.8172).epsilon(1e-4));

  phi.values(1, 0) = 0.0;
  CHECK_THROWS_AS(ltsg_conditional(st, c, phi, 0.01, 0, 4), Error);
}

TEST_CASE("ltsg_conditional approaches lda_conditional on a large corpus") {
  std::mt19937_64 gen(5);
  const auto c = testing::random_corpus(gen, 50, 100, 100, 100);
  auto st = init_assignments(c, 4, 50, 3);
  Rng rng(4);
  for (int s = 0; s < 5; ++s) gibbs_sweep(st, c, SamplingRule::kLda, {4, 0.01, 0.1}, nullptr, rng);
  const auto phi = estimate_phi(st, 0.1);
  double worst = 0;
  for (std::size_t n = 0; n < 20; ++n) {
    const auto a = lda_conditional(st, c, {4, 0.01, 0.1}, 7, n);
    const auto b = ltsg_conditional(st, c, phi, 0.01, 7, n);
    for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  CHECK(worst < 0.01);
}

TEST_CASE("sample_discrete follows the weights") {
  Rng rng(8);
  const std::vector<double> w{1.0, 0.0, 3.0};
  std::array<int, 3> hits{};
  for (int i = 0; i < 40000; ++i) ++hits[sample_discrete(w, rng)];
  CHECK(hits[1] == 0);
  CHECK(hits[0] / 40000.0 == doctest::Approx(0.25).epsilon(0.05));
  const std::vector<double> single{2.0};
  CHECK(sample_discrete(single, rng) == 0);
}

TEST_CASE("gibbs_sweep keeps counts and is seeded") {
  std::mt19937_64 gen(2);
  const auto c = testing::random_corpus(gen, 12, 10, 3, 15);
  const Hyperparams h{3, 0.1, 0.1};
  auto a = init_assignments(c, 3, 12, 9);
  auto b = a;
  Rng ra(1), rb(1);
  for (int s = 0; s < 5; ++s) {
    gibbs_sweep(a, c, SamplingRule::kLda, h, nullptr, ra);
    gibbs_sweep(b, c, SamplingRule::kLda, h, nullptr, rb);
    CHECK(a.counts_consistent(c));
  }
  CHECK(a == b);

  const auto phi = estimate_phi(a, 0.1);
  gibbs_sweep(a, c, SamplingRule::kLtsg, h, &phi, ra);
  CHECK(a.counts_consistent(c));
  CHECK_THROWS_AS(gibbs_sweep(a, c, SamplingRule::kLtsg, h, nullptr, ra), Error);

  auto one = init_assignments(c, 1, 12, 9);
  const auto before = one;
  gibbs_sweep(one, c, SamplingRule::kLda, {1, 0.1, 0.1}, nullptr, ra);
  CHECK(one == before);
}

TEST_CASE("estimate_phi and estimate_theta") {
  const auto c = corpus_of({{0, 0, 0, 1}});
  const auto st = TopicState::from_assignments(c, 1, 2, {{0, 0, 0, 0}});
  const auto phi = estimate_phi(st, 0.1);
  CHECK(phi(0, 0) == doctest::Approx(3.1 / 4.2));
  CHECK(phi(0, 1) == doctest::Approx(0.2619).epsilon(1e-4));

  const auto st2 = TopicState::from_assignments(c, 2, 2, {{0, 0, 0, 1}});
  const auto theta = estimate_theta(st2, 0.01);
  CHECK(theta.values(0, 0) == doctest::Approx(3.01 / 4.02));
  CHECK(theta.values(0, 1) == doctest::Approx(0.2512).epsilon(1e-3));

  const auto even = TopicState::from_assignments(c, 2, 2, {{0, 1, 0, 1}});
  CHECK(estimate_theta(even, 0.01).values(0, 0) == doctest::Approx(0.5));

  TopicState zero = TopicState::from_assignments(corpus_of({}), 3, 4, {});
  const auto uniform = estimate_phi(zero, 0.1);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t w = 0; w < 4; ++w) CHECK(uniform(k, w) == doctest::Approx(0.25));
  }

  std::mt19937_64 gen(6);
  const auto big = testing::random_corpus(gen, 20, 30, 1, 30);
  const auto rs = init_assignments(big, 5, 20, 1);
  const auto p = estimate_phi(rs, 0.1);
  const auto t = estimate_theta(rs, 0.01);
  for (std::size_t k = 0; k < 5; ++k) {
    double s = 0;
    for (std::size_t w = 0; w < 20; ++w) s += p(k, w);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  for (std::size_t m = 0; m < 30; ++m) {
    double s = 0;
    for (std::size_t k = 0; k < 5; ++k) s += t.values(m, k);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  CHECK_NOTHROW(validate_phi(p));
}

TEST_CASE("fold_in_document") {
  // Words 0..5 belong to topic 1; topics 0 and 2 live on words 6..11.
  const int K = 3, W = 12;
  Phi concentrated{MatrixD(K, W, 1e-6)};
  for (int w = 0; w < 6; ++w) concentrated.values(1, w) = (1.0 - 6e-6) / 6;
  for (int w = 6; w < W; ++w) {
    concentrated.values(0, w) = (1.0 - 6e-6) / 6;
    concentrated.values(2, w) = (1.0 - 6e-6) / 6;
  }
  std::vector<WordId> doc(50);
  for (int i = 0; i < 50; ++i) doc[i] = i % 6;
  Rng rng(3);
  auto r = fold_in_document(doc, concentrated, 0.01, {}, rng);
  CHECK(r.distribution[1] >= 0.99);
  CHECK(r.tokens.size() == 50);
  CHECK(r.assignments.size() == 50);

  auto empty = fold_in_document({}, concentrated, 0.01, {}, rng);
  for (double v : empty.distribution) CHECK(v == doctest::Approx(1.0 / K));
  const std::vector<WordId> oov{-1, 99};
  CHECK(fold_in_document(oov, concentrated, 0.01, {}, rng).tokens.empty());

  // uniform phi: the mean over seeds of each component stays near 1/K
  Phi flat{MatrixD(K, W, 1.0 / W)};
  std::vector<double> mean(K, 0.0), sq(K, 0.0);
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    Rng local(s);
    const auto d = fold_in_document(doc, flat, 0.01, {}, local).distribution;
    CHECK(std::abs(sum(d) - 1.0) < 1e-12);
    for (int k = 0; k < K; ++k) {
      mean[k] += d[k] / seeds;
      sq[k] += d[k] * d[k] / seeds;
    }
  }
  for (int k = 0; k < K; ++k) {
    const double sd = std::sqrt(std::max(sq[k] - mean[k] * mean[k], 0.0) / seeds);
    CHECK(std::abs(mean[k] - 1.0 / K) <= 3 * sd + 1e-9);
  }
}

TEST_CASE("assignment file round trip and corruption") {
  testing::TempDir tmp("assign");
  std::mt19937_64 gen(4);
  const auto c = testing::random_corpus(gen, 9, 7, 1, 12);
  const auto st = init_assignments(c, 4, 9, 2);
  save_assignments(c, st, tmp / "z.bin");
  const auto loaded = load_assignments(tmp / "z.bin");
  CHECK(loaded.corpus.docs == c.docs);
  CHECK(loaded.state == st);

  const auto bytes = testing::read_file(tmp / "z.bin");
  testing::write_file(tmp / "short.bin", bytes.substr(0, bytes.size() - 3));
  try {
    load_assignments(tmp / "short.bin");
    FAIL("expected truncation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kTruncatedFile);
  }
  testing::write_file(tmp / "long.bin", bytes + "xx");
  CHECK_THROWS_AS(load_assignments(tmp / "long.bin"), Error);
}

TEST_CASE("hyperparameter validation") {
  CHECK_THROWS_AS((Hyperparams{0, 0.1, 0.1}.validate()), Error);
  CHECK_THROWS_AS((Hyperparams{2, 0.0, 0.1}.validate()), Error);
  CHECK_THROWS_AS((Hyperparams{2, 0.1, -1.0}.validate()), Error);
  CHECK_NOTHROW((Hyperparams{2, 0.1, 0.1}.validate()));
}

}  // TEST_SUITE
