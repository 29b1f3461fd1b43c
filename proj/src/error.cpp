#include "unmix/error.hpp"

namespace unmix {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonPositiveMu: return "NonPositiveMu";
    case ErrorCode::NegativeLambda: return "NegativeLambda";
    case ErrorCode::NegativeDelta: return "NegativeDelta";
    case ErrorCode::KindConflict: return "KindConflict";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MaxOuterIterations: return "MaxOuterIterations";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message), line_(line) {}

}  // namespace unmix
