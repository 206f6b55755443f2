#include "errors.hpp"

namespace driftctl {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUsage: return "Usage";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyActionSet: return "EmptyActionSet";
    case ErrorCode::kMalformedModel: return "MalformedModel";
    case ErrorCode::kNotNondecreasing: return "NotNondecreasing";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kNotPositive: return "NotPositive";
    case ErrorCode::kGrowthConditionViolated: return "GrowthConditionViolated";
    case ErrorCode::kNotInActionSet: return "NotInActionSet";
    case ErrorCode::kNonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::kInfeasibleBudget: return "InfeasibleBudget";
    case ErrorCode::kInadmissiblePolicy: return "InadmissiblePolicy";
    case ErrorCode::kUnsupported: return "Unsupported";
    case ErrorCode::kGammaOutOfRange: return "GammaOutOfRange";
    case ErrorCode::kBracketingFailed: return "BracketingFailed";
    case ErrorCode::kEndpointMismatch: return "EndpointMismatch";
    case ErrorCode::kStateOutOfRange: return "StateOutOfRange";
    case ErrorCode::kDualityViolation: return "DualityViolation";
    case ErrorCode::kResidualTooLarge: return "ResidualTooLarge";
    case ErrorCode::kStepTooLarge: return "StepTooLarge";
    case ErrorCode::kNotMonotone: return "NotMonotone";
    case ErrorCode::kValidationFailed: return "ValidationFailed";
  }
  return "Unknown";
}

}  // namespace driftctl
