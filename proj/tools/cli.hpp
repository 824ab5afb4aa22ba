#pragma once

#include <iosfwd>

namespace cartimpact::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitDiverged = 4,
};

/// Entry point of the cartimpact executable; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cartimpact::app
