#include "drro/errors.hpp"

namespace drro {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNotStabilizable: return "NotStabilizable";
    case ErrorKind::kDisturbanceNotScalar: return "DisturbanceNotScalar";
    case ErrorKind::kSingularResolvent: return "SingularResolvent";
    case ErrorKind::kNoStabilizingSolution: return "NoStabilizingSolution";
    case ErrorKind::kFactorizationIdentityViolated: return "FactorizationIdentityViolated";
    case ErrorKind::kNonPositiveSpectrum: return "NonPositiveSpectrum";
    case ErrorKind::kIllConditionedSpectrum: return "IllConditionedSpectrum";
    case ErrorKind::kGridMismatch: return "GridMismatch";
    case ErrorKind::kImaginaryLeak: return "ImaginaryLeak";
    case ErrorKind::kMaxItersExceeded: return "MaxItersExceeded";
    case ErrorKind::kGammaInfeasible: return "GammaInfeasible";
    case ErrorKind::kNumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::kGammaBelowSpectrum: return "GammaBelowSpectrum";
    case ErrorKind::kBracketFailure: return "BracketFailure";
    case ErrorKind::kCausalLeakExceeded: return "CausalLeakExceeded";
    case ErrorKind::kFactorizationError: return "FactorizationError";
    case ErrorKind::kNonFiniteSample: return "NonFiniteSample";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace drro
