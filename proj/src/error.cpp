#include "kochlab/error.hpp"

namespace kochlab {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kPrecisionExhausted: return "precision-exhausted";
    case ErrorCode::kDepthInsufficient: return "depth-insufficient";
    case ErrorCode::kSingularity: return "singularity";
    case ErrorCode::kPositivity: return "positivity-violation";
    case ErrorCode::kBisectionFailure: return "bisection-failure";
    case ErrorCode::kGeometry: return "geometry";
    case ErrorCode::kRankDeficient: return "rank-deficient";
    case ErrorCode::kLevelTooSmall: return "level-too-small";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kHorizon: return "horizon";
    case ErrorCode::kConstructionFailure: return "construction-failure";
    case ErrorCode::kConfigInvalid: return "config-invalid";
    case ErrorCode::kMalformedInput: return "malformed-input";
    case ErrorCode::kUnknownKind: return "unknown-kind";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kBudgetExceeded: return "budget-exceeded";
    case ErrorCode::kWindowEmpty: return "window-empty";
  }
  return "unknown";
}

}  // namespace kochlab
