#pragma once
// Command-line front end. Kept as a library so tests can drive it in-process.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spreadchan::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_parse = 2,
    exit_numeric = 3,
    exit_ambiguous = 4,
};

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// `start:step:stop` (inclusive) or a single number.
std::vector<double> parse_range(std::string_view text);

}  // namespace spreadchan::cli
