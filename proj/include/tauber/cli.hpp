#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tauber::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default output directory (otherwise ".").
inline constexpr const char* kOutDirEnv = "TAUBERLAB_OUT";

/// Runs `tauberlab <subcommand> [options]`. args excludes the program name.
///
/// Writes summary.json plus CSV detail files into the output directory. Returns kExitOk when
/// every enabled check passes, kExitCheckFailed when one fails, kExitUsage on bad input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace tauber::cli
