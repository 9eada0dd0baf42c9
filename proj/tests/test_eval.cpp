#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ltsg/error.hpp"
#include "ltsg/eval.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace ltsg;

namespace {

EncodedCorpus corpus_of(std::vector<std::vector<WordId>> docs) {
  EncodedCorpus c;
  for (const auto& d : docs) c.total_tokens += d.size();
  c.docs = std::move(docs);
  return c;
}

EmbeddingSet small_embeddings(std::mt19937_64& gen, std::size_t W, std::size_t K, std::size_t d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  EmbeddingSet e;
  e.word_vecs = MatrixD(W, d);
  e.inner_vecs = MatrixD(W - 1, d, 0.0);
  e.topic_vecs = MatrixD(K, d);
  for (std::size_t i = 0; i < W * d; ++i) e.word_vecs.data()[i] = u(gen);
  for (std::size_t i = 0; i < K * d; ++i) e.topic_vecs.data()[i] = u(gen);
  return e;
}

std::vector<double> random_distribution(std::mt19937_64& gen, std::size_t K) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> p(K);
  double s = 0;
  for (auto& v : p) s += v = u(gen);
  for (auto& v : p) v /= s;
  return p;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("top_words") {
  Phi phi{MatrixD(1, 5, 0.0)};
  phi.values(0, 3) = 1.0;
  CHECK(top_words(phi, 0, 1) == std::vector<WordId>{3});
  CHECK(top_words(phi, 0, 10).size() == 5);
  CHECK(top_words(phi, 0, 3) == std::vector<WordId>{3, 0, 1});

  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    Phi p{MatrixD(2, 30)};
    for (double& v : p.values.data()) v = static_cast<double>(gen() % 7);
    std::vector<WordId> ids(30);
    std::iota(ids.begin(), ids.end(), 0);
    std::stable_sort(ids.begin(), ids.end(), [&](WordId a, WordId b) { return p(1, a) > p(1, b); });
    ids.resize(10);
    CHECK(top_words(p, 1, 10) == ids);
  }
}

TEST_CASE("umass hand cases") {
  // five documents holding both words
  const auto both = corpus_of({{0, 1}, {0, 1}, {1, 0}, {0, 1, 1}, {1, 0}});
  const DocumentFrequency df(both, 2);
  const std::vector<WordId> pair{1, 0};
  CHECK(umass_coherence(pair, df) == doctest::Approx(std::log(6.0 / 5.0)));
  const auto apart = corpus_of({{0}, {0}, {0}, {0}, {0}, {1}});
  const DocumentFrequency df2(apart, 2);
  CHECK(umass_coherence(std::vector<WordId>{0, 1}, df2) == doctest::Approx(std::log(1.0 / 5.0)));
  CHECK(umass_coherence(std::vector<WordId>{0}, df2) == 0.0);
  const DocumentFrequency df3(apart, 3);
  CHECK_THROWS_AS(umass_coherence(std::vector<WordId>{2, 0}, df3), Error);
}

TEST_CASE("umass matches the definitional double sum") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 60; ++trial) {
    const int W = 5 + static_cast<int>(gen() % 10);
    const auto c = testing::random_corpus(gen, W, 5 + static_cast<int>(gen() % 45), 1, 8);
    const DocumentFrequency df(c, W);
    std::vector<WordId> words(W);
    std::iota(words.begin(), words.end(), 0);
    std::shuffle(words.begin(), words.end(), gen);
    words.resize(2 + gen() % (W - 2));
    oracle::Docs docs;
    for (const auto& d : c.docs) docs.emplace_back(d.begin(), d.end());
    const double want = oracle::umass(std::vector<int>(words.begin(), words.end()), docs);
    CHECK(std::abs(umass_coherence(words, df) - want) < 1e-12);
  }
}

TEST_CASE("coherence report format") {
  const auto c = corpus_of({{0, 1}, {1, 2}, {0, 2}});
  Phi phi{MatrixD(2, 3, 0.1)};
  phi.values(0, 0) = 0.8;
  phi.values(1, 2) = 0.8;
  const auto r = topic_coherence(phi, c, 2);
  CHECK(r.scores.size() == 2);
  CHECK(r.average == doctest::Approx((r.scores[0] + r.scores[1]) / 2));
  const auto vocab = Vocabulary::from_entries({"a", "b", "c"}, {2, 2, 2});
  std::ostringstream out;
  write_coherence_report(out, r, vocab);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("0 ", 0) == 0);
  CHECK(line.find(" a ") != std::string::npos);
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line.rfind("average ", 0) == 0);
}

TEST_CASE("posterior") {
  Phi phi{MatrixD(2, 2, 0.5)};
  phi.values(0, 1) = 0.8;
  phi.values(1, 1) = 0.2;
  const std::vector<double> even{0.5, 0.5}, ctx{0.3, 0.7};
  auto p = word_topic_posterior(1, even, phi);
  CHECK(p[0] == doctest::Approx(0.8));
  p = word_topic_posterior(0, ctx, phi);
  CHECK(p[1] == doctest::Approx(0.7));
  Phi one{MatrixD(1, 2, 0.5)};
  const std::vector<double> single{1.0};
  CHECK(word_topic_posterior(0, single, one) == std::vector<double>{1.0});
}

TEST_CASE("similarity scores") {
  std::mt19937_64 gen(8);
  auto emb = small_embeddings(gen, 6, 3, 4);
  const auto v = topical_word_vector(2, 1, emb);
  CHECK(v.size() == 8);
  CHECK(v[0] == emb.word_vecs(2, 0));
  CHECK(v[4] == emb.topic_vecs(1, 0));
  CHECK(cosine(v, v) == doctest::Approx(1.0));
  const std::vector<double> zero(8, 0.0);
  CHECK(cosine(zero, v) == 0.0);

  const std::vector<double> e0{1, 0, 0}, e1{0, 1, 0};
  CHECK(avg_sim_c(2, e0, 4, e1, emb) ==
        doctest::Approx(cosine(topical_word_vector(2, 0, emb), topical_word_vector(4, 1, emb))));
  CHECK(avg_sim_c(3, e1, 3, e1, emb) == doctest::Approx(1.0));
  CHECK(max_sim_c(3, e1, 3, e1, emb) == doctest::Approx(1.0));

  const std::vector<double> tie{0.4, 0.4, 0.2};
  CHECK(argmax(tie) == 0);
  CHECK(max_sim_c(1, tie, 5, e1, emb) ==
        doctest::Approx(cosine(topical_word_vector(1, 0, emb), topical_word_vector(5, 1, emb))));

  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_distribution(gen, 3), q = random_distribution(gen, 3);
    const WordId a = static_cast<WordId>(gen() % 6), b = static_cast<WordId>(gen() % 6);
    const double s = avg_sim_c(a, p, b, q, emb);
    CHECK(s == doctest::Approx(avg_sim_c(b, q, a, p, emb)).epsilon(1e-12));
    CHECK(max_sim_c(a, p, b, q, emb) == doctest::Approx(max_sim_c(b, q, a, p, emb)).epsilon(1e-12));
    CHECK(s <= 1.0 + 1e-12);
    CHECK(s >= -1.0 - 1e-12);
    // definitional double sum
    double want = 0;
    for (std::size_t z = 0; z < 3; ++z) {
      for (std::size_t y = 0; y < 3; ++y) {
        want += p[z] * q[y] * cosine(topical_word_vector(a, z, emb), topical_word_vector(b, y, emb));
      }
    }
    CHECK(std::abs(s - want) < 1e-12);
  }
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 3, 4}, rev{4, 3, 2, 1};
  CHECK(spearman_rho(x, x) == doctest::Approx(1.0));
  CHECK(spearman_rho(x, rev) == doctest::Approx(-1.0));
  const std::vector<double> tx{1, 2, 2, 3}, ty{1, 3, 2, 4};
  CHECK(std::abs(spearman_rho(tx, ty) - oracle::spearman(tx, ty)) < 1e-12);
  CHECK(average_ranks(tx) == std::vector<double>{1, 2.5, 2.5, 4});

  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + gen() % 30;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(gen() % 6);  // plenty of ties
      b[i] = static_cast<double>(gen() % 1000) / 7.0;
    }
    if (*std::min_element(a.begin(), a.end()) == *std::max_element(a.begin(), a.end())) a[0] += 1;
    const double rho = spearman_rho(a, b);
    CHECK(std::abs(rho - oracle::spearman(a, b)) < 1e-12);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(b[i] / 50.0) - 3.0;
    CHECK(spearman_rho(a, t) == doctest::Approx(rho).epsilon(1e-12));
  }
}

TEST_CASE("scws parsing and evaluation") {
  std::istringstream in(
      "1\tice\tn\tpuck\tn\tthe <b> ice </b> was cold\ta <b>puck</b> slid\t8.5\t9\t8\n"
      "2\tdrug\tn\tdose\tn\ttake the <b>drug</b>\tone <b>dose</b> daily\t7.0\n"
      "3\tice\tn\tdose\tn\tcold <b>ice</b>\t<b>dose</b>\t1.0\n"
      "4\tmissing\tfields\n"
      "5\tzzz\tn\tice\tn\tzzz here\tice\tnot-a-number\n"
      "6\tqqq\tn\tice\tn\tqqq here\tthe ice\t3\n");
  const auto f = parse_scws(in);
  CHECK(f.malformed_lines == 2);
  REQUIRE(f.pairs.size() == 4);
  CHECK(tokenize(f.pairs[0].context1) == std::vector<std::string>{"the", "ice", "was", "cold"});
  CHECK(f.pairs[0].human_score == 8.5);

  ModelBundle m;
  m.vocab = Vocabulary::from_entries({"ice", "puck", "drug", "dose", "the", "cold"}, {6, 5, 4, 3, 2, 1});
  m.config.num_topics = 2;
  m.config.dim = 3;
  std::mt19937_64 gen(6);
  m.embeddings = small_embeddings(gen, 6, 2, 3);
  TopicModelPart part;
  part.phi.values = MatrixD(2, 6, 1.0 / 6);
  m.topics = part;
  const auto r = scws_evaluate(f.pairs, m, SimilarityMode::kAvgSimC, 1);
  CHECK(r.skipped == 1);
  CHECK(r.evaluated == 3);
  CHECK(scws_evaluate(f.pairs, m, SimilarityMode::kAvgSimC, 1).rho_x100 == r.rho_x100);
  CHECK(std::abs(scws_evaluate(f.pairs, m, SimilarityMode::kWordOnly, 1).rho_x100) <= 100.0);

  const std::vector<ScwsPair> oov{{"qqq", "ice", "a", "b", 1.0}, {"ice", "rrr", "a", "b", 2.0}};
  try {
    scws_evaluate(oov, m, SimilarityMode::kMaxSimC, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNoEvaluablePairs);
  }
  CHECK_THROWS_AS(parse_similarity_mode("cosine"), Error);
}

TEST_CASE("scws: proportional scores give 100") {
  // word-only mode with vectors whose cosines follow the human ratings
  ModelBundle m;
  m.vocab = Vocabulary::from_entries({"a", "b", "c", "d"}, {4, 3, 2, 1});
  m.config.dim = 2;
  EmbeddingSet e;
  e.word_vecs = MatrixD(4, 2);
  const double angles[] = {0.0, 0.3, 0.9, 1.4};
  for (int w = 0; w < 4; ++w) {
    e.word_vecs(w, 0) = std::cos(angles[w]);
    e.word_vecs(w, 1) = std::sin(angles[w]);
  }
  e.inner_vecs = MatrixD(3, 2, 0.0);
  e.topic_vecs = MatrixD(0, 2);
  m.embeddings = e;
  const std::vector<ScwsPair> pairs{{"a", "b", "x", "y", 9.0}, {"a", "c", "x", "y", 5.0},
                                    {"a", "d", "x", "y", 1.0}, {"b", "c", "x", "y", 7.0}};
  CHECK(scws_evaluate(pairs, m, SimilarityMode::kWordOnly, 1).rho_x100 == doctest::Approx(100.0));
}

TEST_CASE("document embeddings") {
  std::mt19937_64 gen(3);
  auto emb = small_embeddings(gen, 5, 2, 3);
  const std::vector<WordId> one{4};
  const std::vector<int> z1{1};
  const std::vector<double> theta{0.0, 1.0};
  auto f = document_embedding(one, z1, theta, &emb, DocEmbeddingMethod::kWord);
  CHECK(f == std::vector<double>(emb.word_vecs.row(4).begin(), emb.word_vecs.row(4).end()));
  f = document_embedding(one, z1, theta, &emb, DocEmbeddingMethod::kTopic);
  for (int j = 0; j < 3; ++j) CHECK(f[j] == doctest::Approx(emb.topic_vecs(1, j)));
  f = document_embedding(one, z1, theta, &emb, DocEmbeddingMethod::kTheta);
  CHECK(f == theta);

  const std::vector<WordId> two{0, 3};
  const std::vector<int> z2{1, 0};
  f = document_embedding(two, z2, theta, &emb, DocEmbeddingMethod::kLtsg);
  REQUIRE(f.size() == 6);
  const auto a = topical_word_vector(0, 1, emb), b = topical_word_vector(3, 0, emb);
  for (int j = 0; j < 6; ++j) CHECK(f[j] == doctest::Approx((a[j] + b[j]) / 2));
  CHECK(feature_dim(DocEmbeddingMethod::kLtsg, 2, 3) == 6);
  CHECK(feature_dim(DocEmbeddingMethod::kTheta, 2, 3) == 2);
  CHECK_THROWS_AS(parse_doc_embedding("bow"), Error);
}

TEST_CASE("classifier on separable data") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> noise(0.0, 0.3);
  MatrixD x(200, 2);
  std::vector<int> y(200);
  for (int i = 0; i < 200; ++i) {
    y[i] = i % 2;
    x(i, 0) = (y[i] ? 2.0 : -2.0) + noise(gen);
    x(i, 1) = noise(gen);
  }
  const auto clf = train_classifier(x, y, 2);
  const auto r = evaluate_classification(clf, x, y);
  CHECK(r.accuracy == 100.0);
  CHECK(r.macro_f1 == 100.0);
  const auto p = class_probabilities(clf, x.row(0));
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
  const auto again = train_classifier(x, y, 2);
  CHECK(again.weights == clf.weights);
}

TEST_CASE("macro metrics match the confusion oracle") {
  const std::vector<int> truth{0, 1, 0, 1}, all0{0, 0, 0, 0};
  CHECK(score_predictions(truth, all0, 2).accuracy == 50.0);

  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int C = 2 + static_cast<int>(gen() % 5);
    const std::size_t n = 1 + gen() % 40;
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(gen() % C);
      p[i] = static_cast<int>(gen() % C);
    }
    const auto got = score_predictions(t, p, C);
    const auto want = oracle::macro_prf(t, p, C);
    CHECK(std::abs(got.accuracy - want.accuracy) < 1e-12);
    CHECK(std::abs(got.macro_precision - want.precision) < 1e-12);
    CHECK(std::abs(got.macro_recall - want.recall) < 1e-12);
    CHECK(std::abs(got.macro_f1 - want.f1) < 1e-12);
    int total = 0;
    for (int a = 0; a < C; ++a) {
      for (int b = 0; b < C; ++b) {
        int count = 0;
        for (std::size_t i = 0; i < n; ++i) count += t[i] == a && p[i] == b;
        CHECK(got.confusion(a, b) == count);
        total += got.confusion(a, b);
      }
    }
    CHECK(total == static_cast<int>(n));
  }
  CHECK_THROWS_AS(score_predictions(truth, std::vector<int>{0}, 2), Error);
}

TEST_CASE("report and export formats") {
  const std::vector<int> t{0, 1, 1}, p{0, 1, 0};
  const auto r = score_predictions(t, p, 2);
  std::ostringstream out;
  const std::vector<std::string> names{"neg", "pos"};
  write_classification_report(out, r, names);
  const auto text = out.str();
  CHECK(text.find("neg") != std::string::npos);
  CHECK(text.find("accuracy=66.67") != std::string::npos);
  CHECK(text.find("macro_f1=") != std::string::npos);

  MatrixD x(2, 3, 0.0);
  x(0, 1) = 0.5;
  x(1, 0) = -2.0;
  x(1, 2) = 1.0;
  std::ostringstream ex;
  export_sparse_features(ex, x, std::vector<int>{0, 1});
  CHECK(ex.str() == "0 2:0.5\n1 1:-2 3:1\n");
}

}  // TEST_SUITE
