#include "mhphone/error.hpp"

namespace mhphone {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDegenerateScale: return "DegenerateScale";
    case ErrorKind::kTooLong: return "TooLong";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kInvariantViolation: return "InvariantViolation";
    case ErrorKind::kInvalidParams: return "InvalidParams";
    case ErrorKind::kNotEnoughData: return "NotEnoughData";
    case ErrorKind::kEmptyBatch: return "EmptyBatch";
    case ErrorKind::kAbsorbingState: return "AbsorbingState";
    case ErrorKind::kIo: return "IoError";
  }
  return "Error";
}

bool Error::is_validation() const noexcept {
  switch (kind_) {
    case ErrorKind::kDegenerateScale:
    case ErrorKind::kTooLong:
    case ErrorKind::kParseError:
    case ErrorKind::kInvariantViolation:
    case ErrorKind::kInvalidParams:
      return true;
    default:
      return false;
  }
}

}  // namespace mhphone
