#pragma once

#include <stdexcept>
#include <string>

namespace driftctl {

enum class ErrorCode {
  kOk = 0,
  // input / usage
  kParseError,
  kUsage,
  kIoError,
  // model assumptions
  kEmptyActionSet,
  kMalformedModel,
  kNotNondecreasing,
  kNotNormalized,
  kNotPositive,
  kGrowthConditionViolated,
  kNotInActionSet,
  kNonPositiveParameter,
  kInfeasibleBudget,
  kInadmissiblePolicy,
  kUnsupported,
  // numerical
  kGammaOutOfRange,
  kBracketingFailed,
  kEndpointMismatch,
  kStateOutOfRange,
  kDualityViolation,
  kResidualTooLarge,
  kStepTooLarge,
  kNotMonotone,
  // statistical validation
  kValidationFailed,
};

/// Stable identifier used in reports and by the C API.
const char* error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace driftctl
