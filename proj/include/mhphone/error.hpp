#pragma once

#include <stdexcept>
#include <string>

namespace mhphone {

enum class ErrorKind {
  kDegenerateScale,
  kTooLong,
  kParseError,
  kInvariantViolation,
  kInvalidParams,
  kNotEnoughData,
  kEmptyBatch,
  kAbsorbingState,
  kIo,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above.
/// Validation kinds (bad input data or arguments) map to CLI exit code 1,
/// the rest to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  bool is_validation() const noexcept;

 private:
  ErrorKind kind_;
};

}  // namespace mhphone
