#pragma once

#include <string>
#include <vector>

namespace ratchet::cli {

enum ExitCode : int {
  kSuccess = 0,
  kRuntimeFailure = 1,
  kConfigError = 2,
  kPartialFailure = 3,
  kMissingData = 4,
};

/// Entry point of the `ratchet` binary (subcommands point, sweep, resume,
/// analyze). Returns the process exit code.
int run(int argc, char** argv);

/// Convenience for tests: argv[0] is supplied.
int run(const std::vector<std::string>& args);

}  // namespace ratchet::cli
