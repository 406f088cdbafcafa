#pragma once

#include <stdexcept>
#include <string>

namespace bh {

enum class ErrorKind {
  InvalidArgument,
  DivisionByZero,
  PoleAtPoint,
  SingularFamily,
  IterationBudgetExceeded,
  NearSingularFiber,
  AGMNonConvergence,
  PointNearIdentity,
  ChartHitsBadFiber,
  ContinuationAmbiguity,
  SectionHitsIdentity,
  UnwrapFailure,
  GridMismatch,
  QuadratureStalled,
  OverlappingExcisions,
  DegenerateDenominator,
  NormBounded,
  ConstantMap,
  ProbeRadiusTooLarge,
  Validation,
};

const char* to_string(ErrorKind kind) noexcept;

// True for the kinds that signal a numerical breakdown rather than bad input.
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bh
