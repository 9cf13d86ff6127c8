#pragma once

#include <string>
#include <vector>

namespace curvflow::cli {

/// Runs one subcommand. Returns 0 on success, 1 on invalid input or usage
/// errors, 2 on numerical failure.
int run(int argc, const char* const* argv);
/// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args);

}  // namespace curvflow::cli
