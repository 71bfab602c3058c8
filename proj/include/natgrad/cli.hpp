#pragma once

#include <ostream>

namespace natgrad {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_fails = 2,
  exit_inconclusive = 3,
  exit_no_convergence = 4,
};

/// Runs the command line `argv`. Results go to `out` (or the --out file),
/// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace natgrad
