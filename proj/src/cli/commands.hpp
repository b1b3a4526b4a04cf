#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drro::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInfeasible = 4;

// Entry point of the drro tool. argv[0] is the program name. Never throws;
// failures are reported as a JSON error record on `err` (and error.json in
// the output directory when it can be created) plus the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drro::cli
