#pragma once

#include <ostream>

namespace isac {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_degenerate = 3,
    exit_no_valid_draws = 4,
    exit_validation = 5,
};

/// Entry point of the isac-crb tool; returns the process exit status.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace isac
