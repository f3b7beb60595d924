#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlcd::cli {

// Exit codes: 0 success, 1 runtime error, 2 usage error.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlcd::cli
