#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tsc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `tsc` invocation. `args` excludes the program name.
/// Returns 0 on success, 1 on data/runtime errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tsc::cli
