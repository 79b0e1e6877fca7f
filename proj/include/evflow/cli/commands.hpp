#pragma once

#include <ostream>

namespace evflow::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // I/O or format errors
inline constexpr int kExitConfig = 2;
inline constexpr int kExitGeneration = 3;
inline constexpr int kExitMismatch = 4;  // eval: missing predictions; validate: findings

// Entry point of the `evflow` executable, with injectable streams for tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evflow::cli
