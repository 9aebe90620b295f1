#pragma once

#include <string>
#include <vector>

namespace sten::cli {

// Exit-code contract: 0 = all checks pass, 2 = check/validation failure,
// 3 = config error, 4 = numerical divergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitConfigError = 3;
inline constexpr int kExitDiverged = 4;

// Entry point shared by the binary and in-process tests. args excludes the
// program name: e.g. {"solve", "--config", "run.json", "--out", "out"}.
int run(const std::vector<std::string>& args);

}  // namespace sten::cli
