#pragma once

#include <iosfwd>

namespace pathlangevin::cli {

enum ExitCode : int {
  kSuccess = 0,
  /// I/O failure or a failed comparison gate.
  kFailure = 1,
  kConfigError = 2,
  kDiverged = 3,
  kOracleInfeasible = 4,
};

/// Entry point of the pathlangevin tool; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pathlangevin::cli
