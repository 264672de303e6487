#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace glht {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitInvalid = 2,
};

/// Entry point of the `glht` tool; args[0] is the program name.
///
/// Subcommands: test, contrasts, simulate, emit-data. Results go to `out`,
/// diagnostics to `err` as `error: <kind>: <message>`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glht
