#pragma once

#include <ostream>

namespace fluhost::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitDiverged = 3;

// Runs one subcommand. Normal output goes to `out`; usage text and error
// messages go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fluhost::cli
