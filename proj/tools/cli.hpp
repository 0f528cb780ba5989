#pragma once

#include <string>
#include <vector>

namespace pact::cli {

/// Runs one `pact` subcommand. Returns the process exit status: 0 on success,
/// otherwise the numeric ErrorCode, after writing one JSON error line to stderr.
int run(std::vector<std::string> args);

/// Exit-status table appended to --help.
std::string exit_code_help();

}  // namespace pact::cli
