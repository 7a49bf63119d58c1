#pragma once

#include <iosfwd>
#include <string_view>

namespace desn::cli {

inline constexpr std::string_view tool_version = "1.0.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
    ok = 0,
    usage = 1,
    data = 2,
    numerical = 3,
};

/// Entry point of the `desn` tool. Subcommands: narma, train, predict, mc,
/// sweep, verify. Messages go to `out` and `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace desn::cli
