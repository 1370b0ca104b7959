#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pbil::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitBudget = 2;

// Runs the command line `args` (without the program name). Subcommands:
// run, sweep, bound, check, verify, plot.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pbil::cli
