#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tubecantor {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitConstruction = 3, kExitVerification = 4 };

/// Runs one CLI invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tubecantor
