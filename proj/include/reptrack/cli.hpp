#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reptrack {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Name of the environment variable holding the default config file path.
inline constexpr const char* kConfigEnvVar = "REPORT_CASCADE_CONFIG";

/// Runs one command line (args excludes the program name). "-" as a path
/// means `in` for inputs and `out` for outputs; diagnostics go to `err`.
/// Returns kExitOk, kExitUsage or kExitData.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace reptrack
