#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace geosstv::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 2,
    kRuntime = 3,
    kNotConverged = 4,
};

/// Runs one command line (args[0] is the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace geosstv::cli
