#pragma once

namespace ccws::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;  // command ran but the result is negative (verify)
inline constexpr int kUsage = 2;
inline constexpr int kInfeasible = 3;
inline constexpr int kIo = 4;

int run(int argc, char** argv);

}  // namespace ccws::cli
