#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace genomotif {

enum class ErrorCode {
  MalformedFasta,
  EmptyInput,
  UnknownRegion,
  DuplicateAccession,
  MissingColumn,
  UnmappedLocation,
  Io,
  ShapeMismatch,
  DegenerateBatch,
  NonFiniteInput,
  NonFiniteLoss,
  UnlabeledRecord,
  EmptyDataset,
  ClassTooSmall,
  DegenerateClass,
  BadFormat,
  Usage,
};

std::string_view to_string(ErrorCode code);

// Every library failure carries a code so callers (and the CLI exit-code
// mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFasta: return "MalformedFasta";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnknownRegion: return "UnknownRegion";
    case ErrorCode::DuplicateAccession: return "DuplicateAccession";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnmappedLocation: return "UnmappedLocation";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DegenerateBatch: return "DegenerateBatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::UnlabeledRecord: return "UnlabeledRecord";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::Usage: return "UsageError";
  }
  return "Error";
}

}  // namespace genomotif
