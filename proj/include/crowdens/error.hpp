#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crowdens {

enum class ErrorCode {
  EmptyInput,
  NonPositiveLabel,
  NotCanonical,
  LengthMismatch,
  TooFewObjects,
  EmptyEnsemble,
  InvalidConfig,
  ParseError,
  RaggedRows,
  NonIntegerLabel,
  CorruptRecord,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit codes, HTTP status mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crowdens
