#pragma once

#include <iosfwd>

namespace dspg {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInfeasible = 2,
  kExitNotConverged = 3,
  kExitBadInput = 4,
};

/// Entry point of the `dspg` tool (subcommands solve, generate, evaluate, sweep).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dspg
