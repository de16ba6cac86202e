#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sigtest/error.hpp"

namespace sigtest::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kNumericalError = 3,
  kMissingVariance = 4,
};

int exit_code_for(ErrorKind kind);

/// Runs one CLI invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sigtest::cli
