#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tfa::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes: 0 all asserted checks passed, 1 a check failed, 2 usage or
// input error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tfa::cli
