#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace unmix {

enum class ErrorCode {
  DimensionMismatch,
  NonFinite,
  NotPositiveDefinite,
  NonPositiveMu,
  NegativeLambda,
  NegativeDelta,
  KindConflict,
  InvalidArgument,
  ParseError,
  MaxOuterIterations,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  // 1-based line of the input where parsing failed.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace unmix
