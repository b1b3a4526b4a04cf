#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drro {

enum class ErrorKind {
  kParseError,
  kDimensionMismatch,
  kNotStabilizable,
  kDisturbanceNotScalar,
  kSingularResolvent,
  kNoStabilizingSolution,
  kFactorizationIdentityViolated,
  kNonPositiveSpectrum,
  kIllConditionedSpectrum,
  kGridMismatch,
  kImaginaryLeak,
  kMaxItersExceeded,
  kGammaInfeasible,
  kNumericalBreakdown,
  kGammaBelowSpectrum,
  kBracketFailure,
  kCausalLeakExceeded,
  kFactorizationError,
  kNonFiniteSample,
  kInvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace drro
