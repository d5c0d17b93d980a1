#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pyrofit::tools {

/// Exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitInput = 2,
};

/// Runs the `pyrofit` command line. `args[0]` is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pyrofit::tools
