#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dynmem::cli {

/// Run the command line `args` (without the program name).
/// Returns the process exit code: 0 success, 1 configuration or input error,
/// 2 numeric non-convergence.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dynmem::cli
