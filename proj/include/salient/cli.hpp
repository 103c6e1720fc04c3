#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace salient::cli {

/// Exit codes of `run`.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 1;
inline constexpr int kIoError = 2;

/// Entry point of the salient_align executable. `args` excludes the program
/// name. Diagnostics go to `err`; help text to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace salient::cli
