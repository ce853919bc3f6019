#pragma once

#include <ostream>

namespace svarspec {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitValidation = 2,
  kExitNonGeneric = 3,
  kExitEstimation = 4,
};

/// Entry point of the `svarspec` tool; the run report goes to `out`,
/// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svarspec
