#pragma once

#include <stdexcept>
#include <string>

namespace kochlab {

// Stable numeric values: these are mirrored one-to-one by the C API status codes.
enum class ErrorCode : int {
  kDomain = 1,
  kPrecisionExhausted = 2,
  kDepthInsufficient = 3,
  kSingularity = 4,
  kPositivity = 5,
  kBisectionFailure = 6,
  kGeometry = 7,
  kRankDeficient = 8,
  kLevelTooSmall = 9,
  kPrecondition = 10,
  kHorizon = 11,
  kConstructionFailure = 12,
  kConfigInvalid = 13,
  kMalformedInput = 14,
  kUnknownKind = 15,
  kIo = 16,
  kBudgetExceeded = 17,
  kWindowEmpty = 18,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace kochlab
