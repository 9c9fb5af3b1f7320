#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace deepbarrier {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitUsage = 2, kExitValidation = 3, kExitNumeric = 4 };

/// Runs one subcommand; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace deepbarrier
