#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trbac::tooling {

/// Runs one administrator command. `args` excludes the program name.
/// Returns 0 on success, 1 on a domain error and 2 on a usage error.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err);

}  // namespace trbac::tooling
