#pragma once

#include <string>
#include <vector>

namespace nsmc {

/// Dispatch one command line (without the program name). Returns 0 on
/// success, 1 on a user error (bad arguments, bad config, infeasible
/// request), 2 on an internal error.
int run_command(const std::vector<std::string>& args);

}  // namespace nsmc
