#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace zerodef {

inline constexpr const char* kVersion = "zerodef 0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitParse = 2,
    kExitHypothesis = 3,
    kExitNumeric = 4,
    kExitInfeasible = 5,
};

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);

/// Runs the command line (arguments without the program name) and returns
/// the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zerodef
