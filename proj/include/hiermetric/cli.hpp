#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hiermetric::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2, kNumericError = 3 };

/// Environment variable naming the directory that relative output paths are
/// resolved against.
inline constexpr const char* kOutputDirEnv = "HIERMETRIC_OUT_DIR";

/// Runs one sub-command. `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, const char* const* argv);

}  // namespace hiermetric::cli
