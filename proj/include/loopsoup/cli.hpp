#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace loopsoup::cli {

enum ExitCode : int { kOk = 0, kIdentityFailure = 1, kInputError = 2 };

/// Entry point behind the `loopsoup` binary. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace loopsoup::cli
