#pragma once

#include <stdexcept>
#include <string>

namespace ltsg {

enum class ErrorKind {
  kIo,
  kInvalidArgument,
  kInvalidConfig,
  kEmptyVocabulary,
  kVocabularyTooSmall,
  kInvalidPhi,
  kNoEvaluablePairs,
  kVersionMismatch,
  kTruncatedFile,
  kDimensionMismatch,
  kMalformedFile,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ltsg
