#include "ltsg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "ltsg/error.hpp"

namespace fs = std::filesystem;

namespace ltsg {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string strip_header_block(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    if (line.empty()) return pos < text.size() ? text.substr(pos) : std::string();
  }
  // no blank line: the whole file is header
  return {};
}

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

InputFormat parse_input_format(std::string_view name) {
  if (name == "lines") return InputFormat::kLines;
  if (name == "dirs") return InputFormat::kDirs;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown input format '" + std::string(name) + "'");
}

std::size_t sanitize_utf8(std::string& text) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  std::size_t replaced = 0;
  std::size_t i = 0;
  const auto n = text.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  auto cont = [&](std::size_t k) { return k < n && (byte(k) & 0xC0) == 0x80; };
  bool dirty = false;
  while (i < n) {
    unsigned char c = byte(i);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if (c >= 0xC2 && c <= 0xDF) {
      len = cont(i + 1) ? 2 : 0;
    } else if (c >= 0xE0 && c <= 0xEF) {
      if (cont(i + 1) && cont(i + 2)) {
        unsigned char c1 = byte(i + 1);
        bool overlong = c == 0xE0 && c1 < 0xA0;
        bool surrogate = c == 0xED && c1 >= 0xA0;
        len = (overlong || surrogate) ? 0 : 3;
      }
    } else if (c >= 0xF0 && c <= 0xF4) {
      if (cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        unsigned char c1 = byte(i + 1);
        bool overlong = c == 0xF0 && c1 < 0x90;
        bool too_big = c == 0xF4 && c1 >= 0x90;
        len = (overlong || too_big) ? 0 : 4;
      }
    }
    if (len == 0) {
      if (!dirty) {
        out.assign(text, 0, i);
        dirty = true;
      }
      out += kReplacement;
      ++replaced;
      ++i;
      continue;
    }
    if (dirty) out.append(text, i, len);
    i += len;
  }
  if (dirty) text = std::move(out);
  return replaced;
}

RawCorpus load_documents(const fs::path& path, InputFormat format,
                         const LoadOptions& options) {
  RawCorpus corpus;
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    throw Error(ErrorKind::kIo, "path does not exist: " + path.string());
  }

  if (format == InputFormat::kLines) {
    if (!fs::is_regular_file(path)) {
      throw Error(ErrorKind::kIo, "not a regular file: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      corpus.invalid_utf8_sequences += sanitize_utf8(line);
      corpus.docs.push_back({std::move(line), kNoLabel});
    }
  } else {
    if (!fs::is_directory(path)) {
      throw Error(ErrorKind::kIo, "not a directory: " + path.string());
    }
    std::vector<fs::path> categories;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_directory()) categories.push_back(entry.path());
    }
    std::sort(categories.begin(), categories.end());
    for (const auto& dir : categories) {
      const int label = static_cast<int>(corpus.label_names.size());
      corpus.label_names.push_back(dir.filename().string());
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        std::string text = read_file(file);
        if (options.strip_headers) text = strip_header_block(text);
        corpus.invalid_utf8_sequences += sanitize_utf8(text);
        corpus.docs.push_back({std::move(text), label});
      }
    }
  }
  if (corpus.invalid_utf8_sequences > 0) {
    std::cerr << "warning: replaced " << corpus.invalid_utf8_sequences
              << " invalid UTF-8 sequence(s) in " << path.string() << "\n";
  }
  return corpus;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                               : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> words,
                                    std::vector<std::uint64_t> freqs) {
  if (words.size() != freqs.size()) {
    throw Error(ErrorKind::kInvalidArgument, "words/freqs length mismatch");
  }
  Vocabulary v;
  v.ids_.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0 && freqs[i] > freqs[i - 1]) {
      throw Error(ErrorKind::kMalformedFile,
                  "vocabulary frequencies must be non-increasing by id");
    }
    if (!v.ids_.emplace(words[i], static_cast<WordId>(i)).second) {
      throw Error(ErrorKind::kMalformedFile, "duplicate word '" + words[i] + "'");
    }
  }
  v.words_ = std::move(words);
  v.freqs_ = std::move(freqs);
  return v;
}

WordId Vocabulary::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? -1 : it->second;
}

Vocabulary build_vocabulary(std::span<const RawDocument> docs,
                            std::uint64_t min_count) {
  if (min_count < 1) {
    throw Error(ErrorKind::kInvalidArgument, "min_count must be >= 1");
  }
  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : docs) {
    for (auto& tok : tokenize(doc.text)) ++counts[std::move(tok)];
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [word, count] : counts) {
    if (count >= min_count) kept.emplace_back(word, count);
  }
  if (kept.empty()) throw Error(ErrorKind::kEmptyVocabulary, "empty vocabulary");
  // counts is already lexicographic; stable sort keeps that as the tie-break
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  std::vector<std::uint64_t> freqs;
  words.reserve(kept.size());
  freqs.reserve(kept.size());
  for (auto& [word, count] : kept) {
    words.push_back(std::move(word));
    freqs.push_back(count);
  }
  return Vocabulary::from_entries(std::move(words), std::move(freqs));
}

std::vector<WordId> encode_text(std::string_view text, const Vocabulary& vocab) {
  std::vector<WordId> ids;
  for (const auto& tok : tokenize(text)) {
    if (WordId id = vocab.id(tok); id >= 0) ids.push_back(id);
  }
  return ids;
}

EncodedCorpus encode_corpus(std::span<const RawDocument> docs,
                            const Vocabulary& vocab) {
  EncodedCorpus out;
  const bool labeled = std::any_of(docs.begin(), docs.end(),
                                   [](const RawDocument& d) { return d.label != kNoLabel; });
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::vector<WordId> ids;
    for (const auto& tok : tokenize(docs[i].text)) {
      if (WordId id = vocab.id(tok); id >= 0) {
        ids.push_back(id);
      } else {
        ++out.dropped_tokens;
      }
    }
    if (ids.empty()) {
      ++out.dropped_docs;
      continue;
    }
    out.total_tokens += ids.size();
    out.docs.push_back(std::move(ids));
    out.source_index.push_back(i);
    if (labeled) out.labels.push_back(docs[i].label);
  }
  return out;
}

std::vector<std::vector<std::string>> decode_corpus(const EncodedCorpus& corpus,
                                                    const Vocabulary& vocab) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.docs.size());
  for (const auto& doc : corpus.docs) {
    auto& words = out.emplace_back();
    words.reserve(doc.size());
    for (WordId id : doc) words.push_back(vocab.word(id));
  }
  return out;
}

void save_vocabulary(const Vocabulary& vocab, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.words()[i] << '\t' << vocab.freqs()[i] << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

Vocabulary load_vocabulary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::vector<std::string> words;
  std::vector<std::uint64_t> freqs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw Error(ErrorKind::kMalformedFile,
                  path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>freq");
    }
    words.push_back(line.substr(0, tab));
    try {
      std::size_t used = 0;
      freqs.push_back(std::stoull(line.substr(tab + 1), &used));
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::kMalformedFile,
                  path.string() + ":" + std::to_string(lineno) + ": bad frequency");
    }
  }
  return Vocabulary::from_entries(std::move(words), std::move(freqs));
}

std::uint64_t corpus_hash(const RawCorpus& corpus) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& doc : corpus.docs) {
    mix(doc.text);
    mix(std::string_view("\0", 1));
    mix(doc.label == kNoLabel ? std::string_view("-")
                              : std::string_view(corpus.label_names.at(doc.label)));
    mix(std::string_view("\n", 1));
  }
  return h;
}

Split stratified_split(std::span<const RawDocument> docs, double test_fraction,
                       std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "test fraction must be in [0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < docs.size(); ++i) by_label[docs[i].label].push_back(i);
  Split split;
  std::mt19937_64 rng(seed);
  for (auto& [label, idx] : by_label) {
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(idx.size())));
    split.test.insert(split.test.end(), idx.begin(), idx.begin() + n_test);
    split.train.insert(split.train.end(), idx.begin() + n_test, idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<RawDocument> select(std::span<const RawDocument> docs,
                                std::span<const std::size_t> indices) {
  std::vector<RawDocument> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(docs[i]);
  return out;
}

}  // namespace ltsg
