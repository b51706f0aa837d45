#pragma once

// Command-line front end. Exit codes: 0 success, 1 a check failed (or a
// computation could not finish), 2 usage error.

#include <iosfwd>
#include <string>
#include <vector>

namespace solpole::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// argv[0] is the program name. Results go to `out` (or --out), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// Same without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace solpole::cli
