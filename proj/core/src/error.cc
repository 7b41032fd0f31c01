#include "cpametric/error.h"

namespace cpametric {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kUnknownSymbol: return "UnknownSymbol";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kUnsupportedExpression: return "UnsupportedExpression";
    case ErrorCode::kDisconnectedRegion: return "DisconnectedRegion";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kSingularSimplex: return "SingularSimplex";
    case ErrorCode::kOutsideSimplex: return "OutsideSimplex";
    case ErrorCode::kOutsideDomain: return "OutsideDomain";
    case ErrorCode::kNoForwardSimplex: return "NoForwardSimplex";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kMissingBounds: return "MissingBounds";
    case ErrorCode::kEmptyComplex: return "EmptyComplex";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kNotFeasibleInput: return "NotFeasibleInput";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kLeftDomain: return "LeftDomain";
  }
  return "Unknown";
}

}  // namespace cpametric
