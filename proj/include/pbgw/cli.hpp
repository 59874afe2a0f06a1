#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pbgw {

/// Command-line entry point; returns the process exit code
/// (0 success/verified, 1 verification failure, 2 usage error).
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace pbgw
