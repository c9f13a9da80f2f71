#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gradekit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs `gradekit <args...>` in-process. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gradekit::cli
