#include "betti_heights/error.hpp"

namespace bh {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::PoleAtPoint: return "PoleAtPoint";
    case ErrorKind::SingularFamily: return "SingularFamily";
    case ErrorKind::IterationBudgetExceeded: return "IterationBudgetExceeded";
    case ErrorKind::NearSingularFiber: return "NearSingularFiber";
    case ErrorKind::AGMNonConvergence: return "AGMNonConvergence";
    case ErrorKind::PointNearIdentity: return "PointNearIdentity";
    case ErrorKind::ChartHitsBadFiber: return "ChartHitsBadFiber";
    case ErrorKind::ContinuationAmbiguity: return "ContinuationAmbiguity";
    case ErrorKind::SectionHitsIdentity: return "SectionHitsIdentity";
    case ErrorKind::UnwrapFailure: return "UnwrapFailure";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::QuadratureStalled: return "QuadratureStalled";
    case ErrorKind::OverlappingExcisions: return "OverlappingExcisions";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::NormBounded: return "NormBounded";
    case ErrorKind::ConstantMap: return "ConstantMap";
    case ErrorKind::ProbeRadiusTooLarge: return "ProbeRadiusTooLarge";
    case ErrorKind::Validation: return "Validation";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::DivisionByZero:
    case ErrorKind::SingularFamily:
    case ErrorKind::GridMismatch:
    case ErrorKind::OverlappingExcisions:
    case ErrorKind::ChartHitsBadFiber:
    case ErrorKind::SectionHitsIdentity:
    case ErrorKind::ProbeRadiusTooLarge:
    case ErrorKind::DegenerateDenominator:
    case ErrorKind::ConstantMap:
    case ErrorKind::Validation:
      return false;
    default:
      return true;
  }
}

}  // namespace bh
