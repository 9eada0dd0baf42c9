#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ltsg {

using WordId = std::int32_t;

inline constexpr int kNoLabel = -1;

enum class InputFormat { kLines, kDirs };

InputFormat parse_input_format(std::string_view name);

struct RawDocument {
  std::string text;
  int label = kNoLabel;  // index into RawCorpus::label_names
};

struct RawCorpus {
  std::vector<RawDocument> docs;
  std::vector<std::string> label_names;
  std::size_t invalid_utf8_sequences = 0;
};

struct LoadOptions {
  // Drop every line of a file up to and including the first blank line
  // (newsgroup message headers). Only meaningful for the dirs format.
  bool strip_headers = false;
};

// `lines`: one document per line of a single file.
// `dirs`: one subdirectory per category, one file per document; documents
// are ordered by category name, then file name.
RawCorpus load_documents(const std::filesystem::path& path, InputFormat format,
                         const LoadOptions& options = {});

// Replaces every invalid UTF-8 sequence by U+FFFD. Returns the number of
// replacements.
std::size_t sanitize_utf8(std::string& text);

// Lowercases ASCII letters and splits on maximal runs of ASCII
// non-alphanumeric characters. Bytes >= 0x80 are kept inside tokens.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;

  // Entries must already be in id order with non-increasing frequency.
  static Vocabulary from_entries(std::vector<std::string> words,
                                 std::vector<std::uint64_t> freqs);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  // -1 when absent.
  WordId id(std::string_view word) const;
  bool contains(std::string_view word) const { return id(word) >= 0; }

  const std::string& word(WordId id) const { return words_.at(id); }
  std::uint64_t freq(WordId id) const { return freqs_.at(id); }

  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<std::uint64_t>& freqs() const noexcept { return freqs_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.freqs_ == b.freqs_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> freqs_;
  std::unordered_map<std::string, WordId> ids_;
};

// Ids are assigned by non-increasing frequency, ties broken lexicographically.
// Throws ErrorKind::kEmptyVocabulary when nothing survives the filter.
Vocabulary build_vocabulary(std::span<const RawDocument> docs,
                            std::uint64_t min_count);

struct EncodedCorpus {
  std::vector<std::vector<WordId>> docs;
  std::vector<int> labels;  // parallel to docs; empty when unlabeled
  std::vector<std::size_t> source_index;  // position in the raw document list
  std::size_t total_tokens = 0;
  std::size_t dropped_tokens = 0;
  std::size_t dropped_docs = 0;

  std::size_t num_docs() const noexcept { return docs.size(); }
  bool has_labels() const noexcept { return !labels.empty(); }
};

EncodedCorpus encode_corpus(std::span<const RawDocument> docs,
                            const Vocabulary& vocab);

// Encodes one piece of text; out-of-vocabulary tokens are dropped.
std::vector<WordId> encode_text(std::string_view text, const Vocabulary& vocab);

// Token stream of an encoded corpus mapped back to surface strings.
std::vector<std::vector<std::string>> decode_corpus(const EncodedCorpus& corpus,
                                                    const Vocabulary& vocab);

// One `word<TAB>freq` line per id, in id order.
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

// FNV-1a over document texts and labels.
std::uint64_t corpus_hash(const RawCorpus& corpus);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-label seeded shuffle, then the first round(test_fraction * n_label)
// documents of each label go to the test side. Indices are returned sorted.
Split stratified_split(std::span<const RawDocument> docs, double test_fraction,
                       std::uint64_t seed);

std::vector<RawDocument> select(std::span<const RawDocument> docs,
                                std::span<const std::size_t> indices);

}  // namespace ltsg
