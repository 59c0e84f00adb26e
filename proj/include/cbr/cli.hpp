#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one command. `args` excludes the program name. Returns the exit
/// status: 0 success, 1 usage error, 2 data error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cbr::cli
