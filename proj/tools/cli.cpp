#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "ltsg/corpus.hpp"
#include "ltsg/error.hpp"
#include "ltsg/eval.hpp"
#include "ltsg/io.hpp"
#include "ltsg/trainer.hpp"

namespace fs = std::filesystem;

namespace ltsg::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat key=value file; keys are flag names without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

bool mentions_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Expands `--config FILE` into explicit flags for every key not already given
// on the command line (flag > config file > default).
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config_file(config_path)) {
    if (key == "config") throw UsageError("config files cannot include other config files");
    if (!mentions_flag(rest, "--" + key)) injected.push_back("--" + key + "=" + value);
  }
  // keep the subcommand first
  std::vector<std::string> out;
  if (!rest.empty()) out.push_back(rest.front());
  out.insert(out.end(), injected.begin(), injected.end());
  if (!rest.empty()) out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

Profile profile_from_env() {
  const char* p = std::getenv("LTSG_PROFILE");
  if (p == nullptr || *p == '\0') return Profile::kPaper;
  try {
    return parse_profile(p);
  } catch (const Error&) {
    throw UsageError(std::string("LTSG_PROFILE must be 'paper' or 'desk', got '") + p + "'");
  }
}

void add_train_config_flags(CLI::App& cmd, TrainConfig& c, std::string& mode) {
  cmd.add_option("--k", c.num_topics, "number of topics K")->capture_default_str();
  cmd.add_option("--dim", c.dim, "word/topic embedding dimension d")->capture_default_str();
  cmd.add_option("--window", c.window, "skip-gram context window radius c")->capture_default_str();
  cmd.add_option("--alpha", c.alpha, "Dirichlet prior on document-topic proportions")->capture_default_str();
  cmd.add_option("--beta", c.beta, "Dirichlet prior on topic-word distributions")->capture_default_str();
  cmd.add_option("--init-iters", c.init_iters, "LDA Gibbs sweeps before the outer loop (I)")->capture_default_str();
  cmd.add_option("--outer-iters", c.outer_iters, "outer interactive-learning iterations (nItrs)")->capture_default_str();
  cmd.add_option("--gibbs-iters", c.gibbs_iters, "Gibbs sweeps per outer iteration (nGS)")->capture_default_str();
  cmd.add_option("--epochs", c.epochs, "embedding passes per outer iteration")->capture_default_str();
  cmd.add_option("--eta", c.eta, "initial embedding learning rate")->capture_default_str();
  cmd.add_option("--xi", c.xi, "topic-word update learning rate")->capture_default_str();
  cmd.add_flag("--xi-decay", c.xi_decay, "divide xi by (iteration + 1)");
  cmd.add_flag("--full-phi-grad", c.full_phi_grad,
               "accumulate the topic-word gradient for every topic, not only the assigned one");
  cmd.add_option("--min-count", c.min_count, "drop words rarer than this")->capture_default_str();
  cmd.add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd.add_option("--workers", c.workers, "embedding training threads")->capture_default_str();
  cmd.add_option("--mode", mode, "ltsg | skipgram-only | lda-only | frozen-phi")
      ->capture_default_str()
      ->check(CLI::IsMember({"ltsg", "skipgram-only", "lda-only", "frozen-phi"}));
  cmd.add_flag("--strip-headers", c.strip_headers,
               "drop each file's lines up to the first blank line (dirs format)");
}

void log_config(std::ostream& err, const TrainConfig& c) {
  err << "config:";
  for (const auto& [k, v] : c.to_map()) err << ' ' << k << '=' << v;
  err << "\nseed=" << c.seed << '\n';
}

struct SplitData {
  RawCorpus raw;
  double holdout = 0.0;
  std::vector<RawDocument> train;
  std::vector<RawDocument> test;
};

// A labeled corpus defaults to a 60/40 train/test split per category.
inline constexpr double kDefaultHoldout = 0.4;

SplitData load_split(const std::string& input, const std::string& format,
                     bool strip_headers, std::optional<double> holdout_opt,
                     std::uint64_t split_seed) {
  SplitData d;
  LoadOptions opts;
  opts.strip_headers = strip_headers;
  d.raw = load_documents(input, parse_input_format(format), opts);
  d.holdout = holdout_opt.value_or(d.raw.label_names.empty() ? 0.0 : kDefaultHoldout);
  if (d.holdout > 0.0) {
    const auto split = stratified_split(d.raw.docs, d.holdout, split_seed);
    d.train = select(d.raw.docs, split.train);
    d.test = select(d.raw.docs, split.test);
  } else {
    d.train = d.raw.docs;
  }
  return d;
}

std::string pre_or(const ModelBundle& b, const std::string& key, const std::string& fallback) {
  auto it = b.provenance.preprocessing.find(key);
  return it == b.provenance.preprocessing.end() ? fallback : it->second;
}

std::vector<int> labels_of(const EncodedCorpus& enc) {
  if (!enc.has_labels()) throw Error(ErrorKind::kMalformedFile, "corpus has no category labels");
  for (int y : enc.labels) {
    if (y == kNoLabel) throw Error(ErrorKind::kMalformedFile, "unlabeled document in labeled corpus");
  }
  return enc.labels;
}

// Training/test encodings for a bundle trained with `train --holdout`.
struct ClassificationData {
  std::vector<std::string> class_names;
  EncodedCorpus train;
  EncodedCorpus test;
};

ClassificationData classification_data(const ModelBundle& model, const std::string& input,
                                       std::string format, std::ostream& err) {
  if (format.empty()) format = pre_or(model, "format", "dirs");
  const double holdout = std::stod(pre_or(model, "holdout", "0"));
  const auto split_seed = std::stoull(pre_or(model, "split_seed", std::to_string(model.config.seed)));
  if (!(holdout > 0.0)) {
    throw UsageError("model was trained without --holdout; no test documents to classify");
  }
  auto data = load_split(input, format, model.config.strip_headers, holdout, split_seed);
  if (corpus_hash(data.raw) != model.provenance.corpus_hash) {
    err << "warning: corpus hash differs from the one recorded in the model\n";
  }
  ClassificationData out;
  out.class_names = data.raw.label_names;
  out.train = encode_corpus(data.train, model.vocab);
  out.test = encode_corpus(data.test, model.vocab);
  if (model.topics && out.train.docs != model.corpus.docs) {
    throw Error(ErrorKind::kDimensionMismatch,
                "training split does not reproduce the model's training documents");
  }
  return out;
}

int cmd_train(const TrainConfig& config, const std::string& input, const std::string& format,
              const std::string& out_dir, std::optional<double> holdout, std::uint64_t split_seed,
              std::ostream& out, std::ostream& err) {
  log_config(err, config);
  config.validate();
  auto data = load_split(input, format, config.strip_headers, holdout, split_seed);
  const auto vocab = build_vocabulary(data.train, static_cast<std::uint64_t>(config.min_count));
  const auto encoded = encode_corpus(data.train, vocab);
  err << "corpus: " << data.raw.docs.size() << " documents (" << data.train.size()
      << " for training), W=" << vocab.size() << ", tokens=" << encoded.total_tokens
      << ", dropped tokens=" << encoded.dropped_tokens
      << ", dropped documents=" << encoded.dropped_docs << '\n';
  RunObserver observer;
  observer.log = [&err](const std::string& msg) { err << msg << '\n'; };
  auto bundle = run_ltsg(config, vocab, encoded, observer);
  bundle.provenance.corpus_hash = corpus_hash(data.raw);
  auto& pre = bundle.provenance.preprocessing;
  pre["format"] = format;
  pre["holdout"] = io::format_shortest(data.holdout);
  pre["split_seed"] = std::to_string(split_seed);
  pre["dropped_tokens"] = std::to_string(encoded.dropped_tokens);
  pre["dropped_docs"] = std::to_string(encoded.dropped_docs);
  pre["invalid_utf8"] = std::to_string(data.raw.invalid_utf8_sequences);
  save_model(bundle, out_dir);
  out << "saved " << to_string(config.mode) << " model to " << out_dir << '\n';
  return kExitOk;
}

const ModelBundle& require_topics(const ModelBundle& m) {
  if (!m.has_topics()) throw Error(ErrorKind::kMalformedFile, "model has no topic component");
  return m;
}

const ModelBundle& require_embeddings(const ModelBundle& m) {
  if (!m.has_embeddings()) throw Error(ErrorKind::kMalformedFile, "model has no embeddings");
  return m;
}

void log_model(std::ostream& err, const std::string& dir, const ModelBundle& m) {
  err << "model: " << dir << " mode=" << to_string(m.config.mode) << " W=" << m.vocab.size()
      << " K=" << m.config.num_topics << " d=" << m.config.dim << '\n';
  log_config(err, m.config);
}

int cmd_eval_coherence(const std::string& model_dir, std::size_t top, std::ostream& out,
                       std::ostream& err) {
  const auto model = load_model(model_dir);
  log_model(err, model_dir, model);
  require_topics(model);
  const auto report = topic_coherence(model.topics->phi, model.corpus, top);
  write_coherence_report(out, report, model.vocab);
  return kExitOk;
}

int cmd_eval_scws(const std::string& model_dir, const std::string& scws_path,
                  const std::string& mode, std::optional<std::uint64_t> seed,
                  int fold_sweeps, std::ostream& out, std::ostream& err) {
  const auto model = load_model(model_dir);
  log_model(err, model_dir, model);
  const auto sim_mode = parse_similarity_mode(mode);
  require_embeddings(model);
  if (sim_mode != SimilarityMode::kWordOnly) require_topics(model);
  const auto file = load_scws(scws_path);
  if (file.malformed_lines > 0) {
    err << "warning: skipped " << file.malformed_lines << " malformed lines in " << scws_path << '\n';
  }
  const std::uint64_t s = seed.value_or(model.config.seed);
  err << "eval seed=" << s << '\n';
  FoldInOptions fold;
  fold.sweeps = fold_sweeps;
  const auto result = scws_evaluate(file.pairs, model, sim_mode, s, fold);
  out << "rho_x100=" << io::format_shortest(result.rho_x100) << " skipped=" << result.skipped << '\n';
  return kExitOk;
}

struct ClassifyArgs {
  std::string model_dir;
  std::string input;
  std::string format;
  std::string method = "ltsg";
  ClassifierOptions options;
  std::optional<std::uint64_t> seed;
  std::string export_train;
  std::string export_test;
};

void write_features(const std::string& path, const MatrixD& x, std::span<const int> y) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path);
  export_sparse_features(f, x, y);
  if (!f) throw Error(ErrorKind::kIo, "write failed: " + path);
}

int cmd_classify(ClassifyArgs a, std::ostream& out, std::ostream& err) {
  const auto model = load_model(a.model_dir);
  log_model(err, a.model_dir, model);
  const auto method = parse_doc_embedding(a.method);
  if (method == DocEmbeddingMethod::kTheta || method == DocEmbeddingMethod::kTopic ||
      method == DocEmbeddingMethod::kLtsg) {
    require_topics(model);
  }
  if (method != DocEmbeddingMethod::kTheta) require_embeddings(model);
  a.options.seed = a.seed.value_or(model.config.seed);
  err << "classifier seed=" << a.options.seed << " epochs=" << a.options.epochs
      << " l2=" << a.options.l2 << " method=" << to_string(method) << '\n';

  const auto data = classification_data(model, a.input, a.format, err);
  const auto train_y = labels_of(data.train);
  const auto test_y = labels_of(data.test);
  const auto train_x = training_features(model, data.train, method);
  const auto test_x = heldout_features(model, data.test, method, a.options.seed);
  if (!a.export_train.empty()) write_features(a.export_train, train_x, train_y);
  if (!a.export_test.empty()) write_features(a.export_test, test_x, test_y);

  const int classes = static_cast<int>(data.class_names.size());
  const auto clf = train_classifier(train_x, train_y, classes, a.options);
  const auto report = evaluate_classification(clf, test_x, test_y);
  out << "method=" << to_string(method) << " train=" << data.train.num_docs()
      << " test=" << data.test.num_docs() << '\n';
  write_classification_report(out, report, data.class_names);
  return kExitOk;
}

int cmd_infer_doc(const std::string& model_dir, const std::string& text, const std::string& file,
                  std::optional<std::uint64_t> seed, int sweeps, std::size_t top,
                  std::ostream& out, std::ostream& err) {
  if (text.empty() == file.empty()) throw UsageError("give exactly one of --text or --file");
  const auto model = load_model(model_dir);
  log_model(err, model_dir, model);
  require_topics(model);
  std::string body = text;
  if (!file.empty()) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot read " + file);
    std::ostringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  sanitize_utf8(body);
  const auto tokens = encode_text(body, model.vocab);
  const std::uint64_t s = seed.value_or(model.config.seed);
  err << "infer seed=" << s << " tokens=" << tokens.size() << '\n';
  Rng rng(s);
  FoldInOptions fold;
  fold.sweeps = sweeps;
  const auto result = fold_in_document(tokens, model.topics->phi, model.config.alpha, fold, rng);
  for (std::size_t k = 0; k < result.distribution.size(); ++k) {
    out << k << ' ' << io::format_shortest(result.distribution[k]);
    for (WordId w : top_words(model.topics->phi, k, top)) out << ' ' << model.vocab.word(w);
    out << '\n';
  }
  return kExitOk;
}

int cmd_export(const std::string& model_dir, const std::string& what, const std::string& out_path,
               const std::string& method_name, std::ostream& out, std::ostream& err) {
  const auto model = load_model(model_dir);
  log_model(err, model_dir, model);
  if (what == "words") {
    require_embeddings(model);
    save_word2vec_text(out_path, model.vocab.words(), model.embeddings->word_vecs);
  } else if (what == "topics") {
    require_embeddings(model);
    require_topics(model);
    std::vector<std::string> names;
    for (int k = 0; k < model.config.num_topics; ++k) names.push_back(topic_token(k));
    save_word2vec_text(out_path, names, model.embeddings->topic_vecs);
  } else {
    const auto method = parse_doc_embedding(method_name);
    if (method != DocEmbeddingMethod::kWord) require_topics(model);
    if (method != DocEmbeddingMethod::kTheta) require_embeddings(model);
    const auto x = training_features(model, model.corpus, method);
    std::vector<int> y(model.corpus.num_docs(), 0);
    if (model.corpus.has_labels()) y = model.corpus.labels;
    write_features(out_path, x, y);
  }
  out << "wrote " << what << " to " << out_path << '\n';
  return kExitOk;
}

int cmd_inspect(const std::string& model_dir, std::size_t top, std::ostream& out,
                std::ostream& err) {
  const auto model = load_model(model_dir);
  log_model(err, model_dir, model);
  require_topics(model);
  const auto& phi = model.topics->phi;
  for (std::size_t k = 0; k < phi.num_topics(); ++k) {
    out << k << ':';
    for (WordId w : top_words(phi, k, top)) out << ' ' << model.vocab.word(w);
    out << '\n';
  }
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kInvalidConfig:
      return kExitUsage;
    default:
      return kExitData;
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ltsg: train topic assignments, word vectors and topic vectors together"};
  app.name("ltsg");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  app.add_option("--config", "flat key=value file with defaults for the subcommand's flags");

  TrainConfig config;
  std::vector<std::string> args;
  try {
    config = TrainConfig::defaults(profile_from_env());
    args = expand_config(raw_args);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  // train
  auto* train = app.add_subcommand("train", "train a model and save the bundle");
  std::string input, format = "dirs", out_dir;
  std::optional<double> holdout;
  std::optional<std::uint64_t> split_seed;
  std::string mode{to_string(config.mode)};
  train->add_option("--input", input, "corpus file (lines) or directory (dirs)")->required();
  train->add_option("--format", format, "lines | dirs")
      ->capture_default_str()
      ->check(CLI::IsMember({"lines", "dirs"}));
  train->add_option("--out", out_dir, "output bundle directory")->required();
  train->add_option("--holdout", holdout,
                    "fraction of each category held out for classification; default 0.4 "
                    "for labeled corpora, 0 otherwise")
      ->check(CLI::Range(0.0, 0.99));
  train->add_option("--split-seed", split_seed, "seed of the holdout split (default: --seed)");
  add_train_config_flags(*train, config, mode);

  // eval-coherence
  auto* coh = app.add_subcommand("eval-coherence", "average UMass coherence of top topic words");
  std::string model_dir;
  std::size_t top = 10;
  coh->add_option("--model", model_dir, "bundle directory")->required();
  coh->add_option("--top", top, "words per topic")->capture_default_str()->check(CLI::PositiveNumber);

  // eval-scws
  auto* scws = app.add_subcommand("eval-scws", "contextual word similarity (Spearman x100)");
  std::string scws_path, sim_mode = "AvgSimC";
  std::optional<std::uint64_t> eval_seed;
  int fold_sweeps = FoldInOptions{}.sweeps;
  scws->add_option("--model", model_dir, "bundle directory")->required();
  scws->add_option("--scws", scws_path, "ratings file")->required();
  scws->add_option("--mode", sim_mode, "AvgSimC | MaxSimC | word-only")
      ->capture_default_str()
      ->check(CLI::IsMember({"AvgSimC", "MaxSimC", "word-only"}));
  scws->add_option("--seed", eval_seed, "context fold-in seed (default: model seed)");
  scws->add_option("--fold-in-sweeps", fold_sweeps, "Gibbs sweeps per context")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  // classify
  auto* cls = app.add_subcommand("classify",
                                 "train and score a linear classifier on the model's holdout split");
  ClassifyArgs ca;
  cls->add_option("--model", ca.model_dir, "bundle directory")->required();
  cls->add_option("--input", ca.input, "the corpus the model was trained on")->required();
  cls->add_option("--format", ca.format, "lines | dirs (default: as recorded in the model)")
      ->check(CLI::IsMember({"lines", "dirs"}));
  cls->add_option("--method", ca.method, "theta | topic | word | ltsg")
      ->capture_default_str()
      ->check(CLI::IsMember({"theta", "topic", "word", "ltsg"}));
  cls->add_option("--epochs", ca.options.epochs, "classifier SGD epochs")->capture_default_str();
  cls->add_option("--l2", ca.options.l2, "L2 penalty")->capture_default_str();
  cls->add_option("--lr", ca.options.learning_rate, "classifier learning rate")->capture_default_str();
  cls->add_option("--seed", ca.seed, "classifier and fold-in seed (default: model seed)");
  cls->add_option("--export-train", ca.export_train, "write training features (sparse text)");
  cls->add_option("--export-test", ca.export_test, "write test features (sparse text)");

  // infer-doc
  auto* infer = app.add_subcommand("infer-doc", "fold in a new document and print its topic mix");
  std::string text, file;
  std::size_t infer_top = 5;
  int infer_sweeps = FoldInOptions{}.sweeps;
  std::optional<std::uint64_t> infer_seed;
  infer->add_option("--model", model_dir, "bundle directory")->required();
  infer->add_option("--text", text, "document text");
  infer->add_option("--file", file, "document file");
  infer->add_option("--seed", infer_seed, "fold-in seed (default: model seed)");
  infer->add_option("--sweeps", infer_sweeps, "Gibbs sweeps")->capture_default_str()->check(CLI::PositiveNumber);
  infer->add_option("--top", infer_top, "top words printed per topic")->capture_default_str();

  // export
  auto* exp = app.add_subcommand("export", "write embeddings or document features");
  std::string what, export_out, export_method = "ltsg";
  exp->add_option("--model", model_dir, "bundle directory")->required();
  exp->add_option("--what", what, "words | topics | features")
      ->required()
      ->check(CLI::IsMember({"words", "topics", "features"}));
  exp->add_option("--out", export_out, "output file")->required();
  exp->add_option("--method", export_method, "feature method for --what features")
      ->capture_default_str()
      ->check(CLI::IsMember({"theta", "topic", "word", "ltsg"}));

  // inspect
  auto* insp = app.add_subcommand("inspect", "top words of every topic");
  insp->add_option("--model", model_dir, "bundle directory")->required();
  insp->add_option("--top", top, "words per topic")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed()) {
      config.mode = parse_run_mode(mode);
      return cmd_train(config, input, format, out_dir, holdout, split_seed.value_or(config.seed),
                       out, err);
    }
    if (coh->parsed()) return cmd_eval_coherence(model_dir, top, out, err);
    if (scws->parsed()) {
      return cmd_eval_scws(model_dir, scws_path, sim_mode, eval_seed, fold_sweeps, out, err);
    }
    if (cls->parsed()) return cmd_classify(ca, out, err);
    if (infer->parsed()) {
      return cmd_infer_doc(model_dir, text, file, infer_seed, infer_sweeps, infer_top, out, err);
    }
    if (exp->parsed()) return cmd_export(model_dir, what, export_out, export_method, out, err);
    if (insp->parsed()) return cmd_inspect(model_dir, top, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace ltsg::cli
