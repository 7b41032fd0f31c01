#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpametric {

enum class ErrorCode {
  kSyntaxError,
  kUnknownSymbol,
  kDimensionMismatch,
  kDomainError,
  kUnsupportedExpression,
  kDisconnectedRegion,
  kEmptySelection,
  kSingularSimplex,
  kOutsideSimplex,
  kOutsideDomain,
  kNoForwardSimplex,
  kNotPositiveDefinite,
  kMissingBounds,
  kEmptyComplex,
  kInvalidArgument,
  kIoError,
  kNotFeasibleInput,
  kNoConvergence,
  kNonFiniteState,
  kLeftDomain,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// command line front end can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures additionally record the byte offset into the source text.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error(ErrorCode::kSyntaxError,
              "at position " + std::to_string(position) + ": " + message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace cpametric
