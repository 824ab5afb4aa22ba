#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cartimpact {

enum class ErrorCode {
  InvalidArgument,
  Diverged,
  NoSignChange,
  NonTransversal,
  SimultaneousImpact,
  ZenoGuardTripped,
  NoConvergence,
  SingularJacobian,
  NotClosed,
  NoReturn,
  Config,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for all library failures; the code says which.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cartimpact
