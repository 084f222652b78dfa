#pragma once

// The `gtl` command line. Exit codes: 0 ok, 2 input error, 3 numeric failure.

namespace gtl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

int run_cli(int argc, const char* const* argv);

}  // namespace gtl
