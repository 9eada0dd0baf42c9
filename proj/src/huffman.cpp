#include "ltsg/huffman.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <tuple>

#include "ltsg/error.hpp"

namespace ltsg {

HuffmanTree HuffmanTree::build(std::span<const std::uint64_t> freqs) {
  const std::size_t W = freqs.size();
  if (W < 2) {
    throw Error(ErrorKind::kVocabularyTooSmall,
                "vocabulary too small for hierarchical softmax");
  }
  // Node ids: leaves 0..W-1, inner node j is W + j.
  std::vector<std::size_t> parent(2 * W - 1, 0);
  std::vector<std::uint8_t> is_left(2 * W - 1, 0);

  using Entry = std::tuple<std::uint64_t, std::size_t>;  // (count, node id)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t w = 0; w < W; ++w) queue.emplace(freqs[w], w);

  for (std::size_t j = 0; j + 1 < W; ++j) {
    auto [c1, first] = queue.top();
    queue.pop();
    auto [c2, second] = queue.top();
    queue.pop();
    const std::size_t node = W + j;
    parent[first] = node;
    parent[second] = node;
    is_left[first] = 1;
    queue.emplace(c1 + c2, node);
  }

  const std::size_t root = 2 * W - 2;
  HuffmanTree tree;
  tree.paths_.resize(W);
  tree.codes_.resize(W);
  for (std::size_t w = 0; w < W; ++w) {
    auto& path = tree.paths_[w];
    auto& code = tree.codes_[w];
    for (std::size_t node = w; node != root; node = parent[node]) {
      path.push_back(static_cast<std::int32_t>(parent[node] - W));
      code.push_back(is_left[node]);
    }
    std::reverse(path.begin(), path.end());
    std::reverse(code.begin(), code.end());
  }
  return tree;
}

}  // namespace ltsg
