#include "ltsg/trainer.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "ltsg/error.hpp"
#include "ltsg/io.hpp"

namespace fs = std::filesystem;

namespace ltsg {

namespace {

std::int64_t current_timestamp() {
  // SOURCE_DATE_EPOCH pins the timestamp for reproducible bundles.
  if (const char* fixed = std::getenv("SOURCE_DATE_EPOCH"); fixed && *fixed) {
    return std::strtoll(fixed, nullptr, 10);
  }
  return static_cast<std::int64_t>(std::time(nullptr));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const std::string& require(const std::map<std::string, std::string>& m,
                           const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) {
    throw Error(ErrorKind::kMalformedFile, "manifest is missing '" + key + "'");
  }
  return it->second;
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::kInvalidConfig, "'" + key + "' expects an integer, got '" + value + "'");
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::kInvalidConfig, "'" + key + "' expects a number, got '" + value + "'");
}

std::uint64_t parse_seed(const std::string& value) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(value, &used);
    if (used == value.size() && value.find('-') == std::string::npos) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::kInvalidConfig, "'seed' expects an unsigned integer, got '" + value + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  throw Error(ErrorKind::kInvalidConfig, "'" + key + "' expects a boolean, got '" + value + "'");
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kMalformedFile, path.string() + ": expected key=value");
    }
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

// docs.tsv: `source_index<TAB>label` per training document.
void read_doc_table(const fs::path& path, EncodedCorpus& corpus) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::vector<std::size_t> source;
  std::vector<int> labels;
  bool any_label = false;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    long long src = -1, label = kNoLabel;
    if (!(row >> src >> label) || src < 0 || label < kNoLabel) {
      throw Error(ErrorKind::kMalformedFile, path.string() + ": bad line '" + line + "'");
    }
    source.push_back(static_cast<std::size_t>(src));
    labels.push_back(static_cast<int>(label));
    any_label = any_label || label != kNoLabel;
  }
  if (source.size() != corpus.docs.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "dimension inconsistency: docs.tsv has " + std::to_string(source.size()) +
                    " rows for " + std::to_string(corpus.docs.size()) + " documents");
  }
  corpus.source_index = std::move(source);
  if (any_label) corpus.labels = std::move(labels);
}

void log_line(const RunObserver& obs, const std::string& msg) {
  if (obs.log) obs.log(msg);
}

void expect_shape(const MatrixD& m, std::size_t rows, std::size_t cols,
                  const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorKind::kDimensionMismatch,
                "dimension inconsistency: " + what + " is " + std::to_string(m.rows()) +
                    "x" + std::to_string(m.cols()) + ", manifest says " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

RunMode parse_run_mode(std::string_view name) {
  if (name == "ltsg") return RunMode::kLtsg;
  if (name == "skipgram-only") return RunMode::kSkipGramOnly;
  if (name == "lda-only") return RunMode::kLdaOnly;
  if (name == "frozen-phi") return RunMode::kFrozenPhi;
  throw Error(ErrorKind::kInvalidConfig, "unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kLtsg: return "ltsg";
    case RunMode::kSkipGramOnly: return "skipgram-only";
    case RunMode::kLdaOnly: return "lda-only";
    case RunMode::kFrozenPhi: return "frozen-phi";
  }
  return "?";
}

Profile parse_profile(std::string_view name) {
  if (name == "paper") return Profile::kPaper;
  if (name == "desk") return Profile::kDesk;
  throw Error(ErrorKind::kInvalidConfig, "unknown profile '" + std::string(name) + "'");
}

std::string_view to_string(Profile profile) {
  return profile == Profile::kPaper ? "paper" : "desk";
}

TrainConfig TrainConfig::defaults(Profile profile) {
  TrainConfig c;
  if (profile == Profile::kDesk) {
    c.num_topics = 20;
    c.dim = 50;
    c.init_iters = 300;
    c.outer_iters = 3;
    c.gibbs_iters = 50;
  }
  return c;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kInvalidConfig, msg); };
  if (num_topics < 1) fail("k must be >= 1");
  if (!(alpha > 0.0)) fail("alpha must be > 0");
  if (!(beta > 0.0)) fail("beta must be > 0");
  if (init_iters < 0 || outer_iters < 0 || gibbs_iters < 0 || epochs < 0) {
    fail("iteration counts must be >= 0");
  }
  if (min_count < 1) fail("min-count must be >= 1");
  if (workers < 1) fail("workers must be >= 1");
  if (mode != RunMode::kLdaOnly) {
    if (dim < 1) fail("dim must be >= 1");
    if (window < 1) fail("window must be >= 1");
    if (!(eta > 0.0)) fail("eta must be > 0");
  }
  if (mode == RunMode::kLtsg && !(xi >= 0.0)) fail("xi must be >= 0");
}

std::map<std::string, std::string> TrainConfig::to_map() const {
  return {
      {"k", std::to_string(num_topics)},
      {"dim", std::to_string(dim)},
      {"window", std::to_string(window)},
      {"alpha", io::format_shortest(alpha)},
      {"beta", io::format_shortest(beta)},
      {"init-iters", std::to_string(init_iters)},
      {"outer-iters", std::to_string(outer_iters)},
      {"gibbs-iters", std::to_string(gibbs_iters)},
      {"epochs", std::to_string(epochs)},
      {"eta", io::format_shortest(eta)},
      {"xi", io::format_shortest(xi)},
      {"xi-decay", xi_decay ? "true" : "false"},
      {"full-phi-grad", full_phi_grad ? "true" : "false"},
      {"min-count", std::to_string(min_count)},
      {"seed", std::to_string(seed)},
      {"workers", std::to_string(workers)},
      {"mode", std::string(to_string(mode))},
      {"strip-headers", strip_headers ? "true" : "false"},
  };
}

TrainConfig TrainConfig::from_map(const std::map<std::string, std::string>& v) {
  static const std::set<std::string> known{
      "k", "dim", "window", "alpha", "beta", "init-iters", "outer-iters", "gibbs-iters",
      "epochs", "eta", "xi", "xi-decay", "full-phi-grad", "min-count", "seed", "workers",
      "mode", "strip-headers"};
  for (const auto& [key, value] : v) {
    if (!known.count(key)) throw Error(ErrorKind::kInvalidConfig, "unknown config key '" + key + "'");
  }
  TrainConfig c;
  auto int_of = [&](const char* key) {
    return static_cast<int>(parse_int(key, require(v, key)));
  };
  c.num_topics = int_of("k");
  c.dim = int_of("dim");
  c.window = int_of("window");
  c.alpha = parse_real("alpha", require(v, "alpha"));
  c.beta = parse_real("beta", require(v, "beta"));
  c.init_iters = int_of("init-iters");
  c.outer_iters = int_of("outer-iters");
  c.gibbs_iters = int_of("gibbs-iters");
  c.epochs = int_of("epochs");
  c.eta = parse_real("eta", require(v, "eta"));
  c.xi = parse_real("xi", require(v, "xi"));
  c.xi_decay = parse_bool("xi-decay", require(v, "xi-decay"));
  c.full_phi_grad = parse_bool("full-phi-grad", require(v, "full-phi-grad"));
  c.min_count = int_of("min-count");
  c.seed = parse_seed(require(v, "seed"));
  c.workers = int_of("workers");
  c.mode = parse_run_mode(require(v, "mode"));
  c.strip_headers = parse_bool("strip-headers", require(v, "strip-headers"));
  return c;
}

void ModelBundle::check_consistency() const {
  const auto W = vocab.size();
  auto fail = [](const std::string& msg) {
    throw Error(ErrorKind::kDimensionMismatch, "dimension inconsistency: " + msg);
  };
  if (topics) {
    const auto K = static_cast<std::size_t>(config.num_topics);
    const auto M = topics->state.num_docs();
    if (topics->phi.num_topics() != K || topics->phi.vocab_size() != W) fail("phi");
    if (topics->theta.values.rows() != M || topics->theta.values.cols() != K) fail("theta");
    if (static_cast<std::size_t>(topics->state.num_topics) != K ||
        static_cast<std::size_t>(topics->state.vocab_size) != W) {
      fail("assignments");
    }
    if (corpus.docs.size() != M) fail("corpus/assignments");
  }
  if (embeddings) {
    const auto d = static_cast<std::size_t>(config.dim);
    if (embeddings->word_vecs.rows() != W || embeddings->dim() != d) fail("word vectors");
    if (embeddings->inner_vecs.rows() + 1 != W || embeddings->inner_vecs.cols() != d) {
      fail("inner vectors");
    }
    const std::size_t K = topics ? static_cast<std::size_t>(config.num_topics) : 0;
    if (embeddings->topic_vecs.rows() != K ||
        (K > 0 && embeddings->topic_vecs.cols() != d)) {
      fail("topic vectors");
    }
  }
}

ModelBundle run_ltsg(const TrainConfig& config, const Vocabulary& vocab,
                     const EncodedCorpus& corpus, const RunObserver& observer) {
  config.validate();
  if (corpus.docs.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "corpus is empty");
  }
  const auto W = static_cast<int>(vocab.size());
  for (const auto& doc : corpus.docs) {
    for (WordId w : doc) {
      if (w < 0 || w >= W) throw Error(ErrorKind::kDimensionMismatch, "token id out of vocabulary");
    }
  }
  const int K = config.num_topics;
  const auto hyper = config.hyperparams();

  ModelBundle bundle;
  bundle.vocab = vocab;
  bundle.config = config;
  bundle.corpus = corpus;
  bundle.provenance.version = std::string(kToolVersion);
  bundle.provenance.created_unix = current_timestamp();

  Rng sampler(derive_seed(config.seed, 0));
  std::optional<TopicState> state;
  std::optional<Phi> phi;

  if (config.mode != RunMode::kSkipGramOnly) {
    state = init_assignments(corpus, K, W, sampler);
    for (int it = 0; it < config.init_iters; ++it) {
      gibbs_sweep(*state, corpus, SamplingRule::kLda, hyper, nullptr, sampler);
      if ((it + 1) % 100 == 0) {
        log_line(observer, "lda sweep " + std::to_string(it + 1) + "/" +
                               std::to_string(config.init_iters));
      }
    }
    phi = estimate_phi(*state, config.beta);
  }

  if (config.mode != RunMode::kLdaOnly) {
    HuffmanTree tree = HuffmanTree::build(vocab);
    const std::size_t topic_rows = state ? static_cast<std::size_t>(K) : 0;
    EmbeddingSet emb = init_embeddings(vocab.size(), topic_rows,
                                       static_cast<std::size_t>(config.dim),
                                       derive_seed(config.seed, 1));
    EpochOptions epoch;
    epoch.window = config.window;
    epoch.learning_rate = config.eta;
    epoch.workers = config.workers;
    epoch.full_phi_grad = config.full_phi_grad;

    for (int i = 0; i < config.outer_iters; ++i) {
      IterationReport report;
      report.iteration = i;
      if (config.mode == RunMode::kSkipGramOnly) {
        epoch.mode = TrainMode::kSkipGramOnly;
        for (int e = 0; e < config.epochs; ++e) {
          auto r = train_epoch(corpus, nullptr, nullptr, emb, tree, epoch);
          report.epoch_tokens += r.tokens;
          report.epoch_pairs += r.pairs;
        }
      } else {
        // Step 1: resample assignments with the phi-driven rule.
        for (int s = 0; s < config.gibbs_iters; ++s) {
          gibbs_sweep(*state, corpus, SamplingRule::kLtsg, hyper, &*phi, sampler);
        }
        // Step 2: topic embeddings from the new assignments.
        emb.topic_vecs = compute_topic_embeddings(*state, corpus, emb.word_vecs);
        if (observer.on_topic_embeddings) observer.on_topic_embeddings(i, *state, emb);
        // Step 3: embedding epochs with phi-gradient accumulation.
        epoch.mode = TrainMode::kLtsg;
        PhiGradAccumulator grad(vocab.size());
        for (int e = 0; e < config.epochs; ++e) {
          auto r = train_epoch(corpus, &*state, &*phi, emb, tree, epoch);
          grad.merge(r.phi_grad);
          report.epoch_tokens += r.tokens;
          report.epoch_pairs += r.pairs;
        }
        if (config.mode == RunMode::kLtsg) {
          const double xi = config.xi_decay ? config.xi / (i + 1) : config.xi;
          phi = apply_phi_update(*phi, grad, xi, state->topic_word);
          report.phi_entries_updated = grad.size();
        }
      }
      log_line(observer, "outer iteration " + std::to_string(i + 1) + "/" +
                             std::to_string(config.outer_iters) + ": " +
                             std::to_string(report.epoch_tokens) + " tokens, " +
                             std::to_string(report.epoch_pairs) + " pairs");
      if (observer.on_iteration) observer.on_iteration(report);
    }
    bundle.embeddings = std::move(emb);
    bundle.tree = std::move(tree);
  }

  if (state) {
    Theta theta = estimate_theta(*state, config.alpha);
    bundle.topics = TopicModelPart{std::move(*state), std::move(*phi), std::move(theta)};
  }
  return bundle;
}

void save_model(const ModelBundle& bundle, const fs::path& dir) {
  bundle.check_consistency();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());

  {
    std::ofstream out(dir / "manifest.txt", std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "cannot write manifest in " + dir.string());
    const auto& c = bundle.config;
    out << "format_version=" << kBundleFormatVersion << '\n';
    out << "tool_version=" << bundle.provenance.version << '\n';
    out << "created_unix=" << bundle.provenance.created_unix << '\n';
    out << "corpus_hash=" << hex64(bundle.provenance.corpus_hash) << '\n';
    out << "W=" << bundle.vocab.size() << '\n';
    out << "K=" << (bundle.topics ? c.num_topics : 0) << '\n';
    out << "M=" << bundle.corpus.docs.size() << '\n';
    out << "N_total=" << bundle.corpus.total_tokens << '\n';
    out << "d=" << (bundle.embeddings ? c.dim : 0) << '\n';
    out << "has_topics=" << (bundle.topics ? 1 : 0) << '\n';
    out << "has_embeddings=" << (bundle.embeddings ? 1 : 0) << '\n';
    out << "tokenizer=lowercase-alnum\n";
    for (const auto& [k, v] : c.to_map()) out << "config." << k << '=' << v << '\n';
    for (const auto& [k, v] : bundle.provenance.preprocessing) out << "pre." << k << '=' << v << '\n';
    if (!out) throw Error(ErrorKind::kIo, "write failed: manifest");
  }
  save_vocabulary(bundle.vocab, dir / "vocab.tsv");

  if (bundle.topics) {
    io::save_matrix_text(bundle.topics->phi.values, dir / "phi.txt");
    io::save_matrix_text(bundle.topics->theta.values, dir / "theta.txt");
    save_assignments(bundle.corpus, bundle.topics->state, dir / "assignments.bin");
  } else {
    // Same layout as assignments.bin with every token in a single topic.
    std::vector<std::vector<int>> zeros;
    for (const auto& doc : bundle.corpus.docs) zeros.emplace_back(doc.size(), 0);
    const auto flat = TopicState::from_assignments(bundle.corpus, 1,
                                                   static_cast<int>(bundle.vocab.size()),
                                                   std::move(zeros));
    save_assignments(bundle.corpus, flat, dir / "corpus.bin");
  }
  {
    std::ofstream out(dir / "docs.tsv", std::ios::binary);
    const auto& c = bundle.corpus;
    for (std::size_t m = 0; m < c.docs.size(); ++m) {
      out << (m < c.source_index.size() ? c.source_index[m] : m) << '\t'
          << (c.has_labels() ? c.labels[m] : kNoLabel) << '\n';
    }
    if (!out) throw Error(ErrorKind::kIo, "write failed: docs.tsv");
  }
  if (bundle.embeddings) {
    const auto& emb = *bundle.embeddings;
    save_word2vec_text(dir / "words.vec", bundle.vocab.words(), emb.word_vecs);
    if (bundle.topics) {
      std::vector<std::string> names;
      for (std::size_t k = 0; k < emb.topic_vecs.rows(); ++k) {
        names.push_back(topic_token(static_cast<int>(k)));
      }
      save_word2vec_text(dir / "topics.vec", names, emb.topic_vecs);
    }
    io::BinaryWriter inner(dir / "inner.bin");
    inner.u64(emb.inner_vecs.rows());
    inner.u64(emb.inner_vecs.cols());
    for (double v : emb.inner_vecs.data()) inner.f64(v);
    inner.close();
  }
}

ModelBundle load_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::kIo, "model directory not found: " + dir.string());
  }
  const auto manifest = read_manifest(dir / "manifest.txt");
  const auto& version = require(manifest, "format_version");
  if (version != std::to_string(kBundleFormatVersion)) {
    throw Error(ErrorKind::kVersionMismatch,
                "bundle format version " + version + " is not supported (expected " +
                    std::to_string(kBundleFormatVersion) + ")");
  }
  auto count = [&](const char* key) {
    auto v = parse_int(key, require(manifest, key));
    if (v < 0) throw Error(ErrorKind::kMalformedFile, std::string("negative ") + key);
    return static_cast<std::size_t>(v);
  };

  ModelBundle b;
  std::map<std::string, std::string> config_values;
  for (const auto& [k, v] : manifest) {
    if (k.rfind("config.", 0) == 0) config_values[k.substr(7)] = v;
    if (k.rfind("pre.", 0) == 0) b.provenance.preprocessing[k.substr(4)] = v;
  }
  b.config = TrainConfig::from_map(config_values);
  b.provenance.version = require(manifest, "tool_version");
  b.provenance.created_unix = static_cast<std::int64_t>(parse_int("created_unix", require(manifest, "created_unix")));
  b.provenance.corpus_hash = std::stoull(require(manifest, "corpus_hash"), nullptr, 16);

  const auto W = count("W");
  const auto K = count("K");
  const auto M = count("M");
  const auto N_total = count("N_total");
  const auto d = count("d");
  const bool has_topics = count("has_topics") != 0;
  const bool has_embeddings = count("has_embeddings") != 0;

  b.vocab = load_vocabulary(dir / "vocab.tsv");
  if (b.vocab.size() != W) {
    throw Error(ErrorKind::kDimensionMismatch,
                "dimension inconsistency: vocab.tsv has " + std::to_string(b.vocab.size()) +
                    " words, manifest says W=" + std::to_string(W));
  }
  if (has_topics && K != static_cast<std::size_t>(b.config.num_topics)) {
    throw Error(ErrorKind::kDimensionMismatch, "dimension inconsistency: K vs config.k");
  }

  if (has_topics) {
    TopicModelPart part;
    part.phi.values = io::load_matrix_text(dir / "phi.txt");
    expect_shape(part.phi.values, K, W, "phi.txt");
    part.theta.values = io::load_matrix_text(dir / "theta.txt");
    expect_shape(part.theta.values, M, K, "theta.txt");
    auto loaded = load_assignments(dir / "assignments.bin");
    if (loaded.corpus.docs.size() != M || loaded.corpus.total_tokens != N_total ||
        static_cast<std::size_t>(loaded.state.num_topics) != K ||
        static_cast<std::size_t>(loaded.state.vocab_size) != W) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "dimension inconsistency: assignments.bin header vs manifest");
    }
    b.corpus = std::move(loaded.corpus);
    part.state = std::move(loaded.state);
    b.topics = std::move(part);
  } else {
    auto loaded = load_assignments(dir / "corpus.bin");
    if (loaded.corpus.docs.size() != M || loaded.corpus.total_tokens != N_total ||
        static_cast<std::size_t>(loaded.state.vocab_size) != W) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "dimension inconsistency: corpus.bin header vs manifest");
    }
    b.corpus = std::move(loaded.corpus);
  }
  read_doc_table(dir / "docs.tsv", b.corpus);

  if (has_embeddings) {
    EmbeddingSet emb;
    auto words = load_word2vec_text(dir / "words.vec");
    expect_shape(words.vecs, W, d, "words.vec");
    if (words.names != b.vocab.words()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "dimension inconsistency: words.vec order differs from vocab.tsv");
    }
    emb.word_vecs = std::move(words.vecs);
    if (has_topics) {
      auto topics = load_word2vec_text(dir / "topics.vec");
      expect_shape(topics.vecs, K, d, "topics.vec");
      emb.topic_vecs = std::move(topics.vecs);
    } else {
      emb.topic_vecs = MatrixD(0, d);
    }
    io::BinaryReader inner(dir / "inner.bin");
    const auto rows = inner.u64();
    const auto cols = inner.u64();
    if (rows + 1 != W || cols != d) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "dimension inconsistency: inner.bin is " + std::to_string(rows) + "x" +
                      std::to_string(cols));
    }
    emb.inner_vecs = MatrixD(rows, cols);
    for (double& v : emb.inner_vecs.data()) v = inner.f64();
    if (!inner.at_end()) throw Error(ErrorKind::kMalformedFile, "inner.bin: trailing bytes");
    b.embeddings = std::move(emb);
    b.tree = HuffmanTree::build(b.vocab);
  }
  b.check_consistency();
  return b;
}

}  // namespace ltsg
