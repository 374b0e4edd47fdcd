#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace symlight {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitIo = 3, kExitUnsupported = 4 };

/// Entry point of the `symlight` tool; `args` excludes the program name.
/// Subcommands: render, solve, eval, check, oracle.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace symlight
