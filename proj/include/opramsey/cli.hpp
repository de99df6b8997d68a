#pragma once

// The opramsey command line: `opramsey <module> <verb> [flags]`.

#include <iosfwd>
#include <string>
#include <vector>

namespace opramsey {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;       // numerical or internal failures
inline constexpr int precondition = 2;  // bad input
inline constexpr int budget = 3;
inline constexpr int usage = 64;        // unknown subcommand
}  // namespace exit_code

std::string usage_text();

/// Runs one command; `args` excludes the program name. The report goes to
/// `out` unless --out names a file; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opramsey
