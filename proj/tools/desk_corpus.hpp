#pragma once

#include <cstdint>
#include <filesystem>

#include "ltsg/corpus.hpp"

namespace ltsg::desk {

struct DeskCorpusOptions {
  int docs_per_category = 500;
  std::uint64_t seed = 20;
};

// Four-category newsgroup-style corpus generated from per-category subtopic
// word lists with shared ambiguous words, function words and short-range
// collocations. Deterministic for a given seed.
RawCorpus generate(const DeskCorpusOptions& options = {});

// Writes the corpus in the `dirs` layout: <dir>/<category>/<index>.txt.
void write_dirs(const RawCorpus& corpus, const std::filesystem::path& dir);

}  // namespace ltsg::desk
