#pragma once

#include "volnet/error.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace volnet {

/// Entry point for the `volnet` tool. args[0] is the program name.
/// Returns 0 on success, 1 for usage errors, 2 for data errors and 3 for numerical errors.
int cli_main(const std::vector<std::string>& args);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit code for an error category.
int exit_code_for(ErrorCategory category);

}  // namespace volnet
