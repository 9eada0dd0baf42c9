#include "ltsg/error.hpp"

namespace ltsg {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kInvalidConfig: return "invalid config";
    case ErrorKind::kEmptyVocabulary: return "empty vocabulary";
    case ErrorKind::kVocabularyTooSmall: return "vocabulary too small";
    case ErrorKind::kInvalidPhi: return "invalid phi";
    case ErrorKind::kNoEvaluablePairs: return "no evaluable pairs";
    case ErrorKind::kVersionMismatch: return "version mismatch";
    case ErrorKind::kTruncatedFile: return "truncated file";
    case ErrorKind::kDimensionMismatch: return "dimension inconsistency";
    case ErrorKind::kMalformedFile: return "malformed file";
  }
  return "unknown error";
}

}  // namespace ltsg
