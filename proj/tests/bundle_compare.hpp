#pragma once

#include "ltsg/trainer.hpp"

namespace testing {

// Field-by-field equality of everything a bundle persists.
inline bool same_bundle(const ltsg::ModelBundle& a, const ltsg::ModelBundle& b) {
  return a.vocab == b.vocab && a.config == b.config && a.corpus.docs == b.corpus.docs &&
         a.corpus.labels == b.corpus.labels && a.corpus.source_index == b.corpus.source_index &&
         a.corpus.total_tokens == b.corpus.total_tokens && a.topics == b.topics &&
         a.embeddings == b.embeddings && a.tree == b.tree && a.provenance == b.provenance;
}

}  // namespace testing
