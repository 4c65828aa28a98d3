#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coalflow::cli {

/// Exit codes: 0 success, 1 gate failure or numerical failure, 2 invalid configuration.
int run(int argc, char** argv);

/// Same with explicit arguments (without the program name) and streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coalflow::cli
