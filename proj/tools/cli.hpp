#pragma once

#include <iosfwd>

namespace fracpersist::cli {

enum ExitCode : int {
    ok = 0,
    failure = 1,
    invalid_input = 2,
    numerical_failure = 3,
    verification_failed = 4,
};

/// Parses argv, runs the selected subcommand and returns the process exit
/// code. Results go to `out` (or to --output), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fracpersist::cli
