#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace clpd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `clpd` invocation. `args[0]` is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clpd::cli
