#pragma once

#include <iosfwd>

namespace imlike::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kNonConvergence = 3;
inline constexpr int kDataset = 4;

// Entry point shared by the executable and the tests. CSV goes to --out (or
// `out` when --out is "-"); messages go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace imlike::cli
