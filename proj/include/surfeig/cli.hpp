#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace surfeig {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Parses "A..B" (inclusive) or a single level "A".
std::vector<int> parse_level_range(const std::string& text);

/// Runs one subcommand (converge, solve, area, abstract). Results go to `out`
/// unless redirected to a file; messages and usage text go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace surfeig
