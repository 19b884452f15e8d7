#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polyflex {
namespace cli {

// Exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // internal error, numerics gave up
inline constexpr int kExitBadInput = 2;  // unreadable files, ill-formed JSON, bad flags
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitScaleGuard = 4;

/// Runs one invocation. `args` is the command line without the program name.
/// Reports and results go to `out`, diagnostics to `err`; the return value is
/// the process exit code. Output files named by the subcommands are written
/// relative to the working directory unless --output says otherwise.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cli
} // namespace polyflex
