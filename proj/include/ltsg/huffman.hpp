#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ltsg/corpus.hpp"

namespace ltsg {

// Binary tree over the vocabulary for hierarchical softmax. Leaves are the
// words; inner nodes are numbered 0..W-2 in creation order, so the root is
// W-2. Each word stores its root-to-leaf path of inner nodes and the bit
// taken at each step: code[i] = 1 when path step i+1 goes to the left
// (first merged) child.
class HuffmanTree {
 public:
  HuffmanTree() = default;

  // Merge queue ordered by (count, creation index); leaves are created first
  // in id order. Throws ErrorKind::kVocabularyTooSmall when W < 2.
  static HuffmanTree build(std::span<const std::uint64_t> freqs);
  static HuffmanTree build(const Vocabulary& vocab) { return build(vocab.freqs()); }

  std::size_t num_words() const noexcept { return paths_.size(); }
  std::size_t num_inner() const noexcept { return num_words() > 0 ? num_words() - 1 : 0; }

  std::span<const std::int32_t> path(WordId w) const { return paths_.at(w); }
  std::span<const std::uint8_t> code(WordId w) const { return codes_.at(w); }
  std::size_t code_length(WordId w) const { return codes_.at(w).size(); }

  friend bool operator==(const HuffmanTree&, const HuffmanTree&) = default;

 private:
  std::vector<std::vector<std::int32_t>> paths_;
  std::vector<std::vector<std::uint8_t>> codes_;
};

}  // namespace ltsg
