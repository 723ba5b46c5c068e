#include <crowdens/error.hpp>

namespace crowdens {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonPositiveLabel: return "NonPositiveLabel";
    case ErrorCode::NotCanonical: return "NotCanonical";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewObjects: return "TooFewObjects";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::NonIntegerLabel: return "NonIntegerLabel";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace crowdens
