#pragma once

#include <string>
#include <vector>

namespace ddcrp {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // bad arguments, config validation, missing inputs
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

int run_cli(int argc, char** argv);
/// args excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace ddcrp
