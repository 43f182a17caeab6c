#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace textmill::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs the command line `args` (without the program name). Diagnostics go to
/// `err` as "LEVEL: message" lines; "-" paths use standard input/output.
int run(const std::vector<std::string>& args, std::ostream& err);

}  // namespace textmill::cli
