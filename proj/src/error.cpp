#include "cartimpact/error.hpp"

namespace cartimpact {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return "InvalidArgument";
    case ErrorCode::Diverged:
      return "Diverged";
    case ErrorCode::NoSignChange:
      return "NoSignChange";
    case ErrorCode::NonTransversal:
      return "NonTransversal";
    case ErrorCode::SimultaneousImpact:
      return "SimultaneousImpact";
    case ErrorCode::ZenoGuardTripped:
      return "ZenoGuardTripped";
    case ErrorCode::NoConvergence:
      return "NoConvergence";
    case ErrorCode::SingularJacobian:
      return "SingularJacobian";
    case ErrorCode::NotClosed:
      return "NotClosed";
    case ErrorCode::NoReturn:
      return "NoReturn";
    case ErrorCode::Config:
      return "Config";
  }
  return "Unknown";
}

}  // namespace cartimpact
