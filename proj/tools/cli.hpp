#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crrn::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kError = 1,
  /// The command finished but its target was not met (iteration budget
  /// exhausted, certificate missing, verification violations).
  kNotMet = 2,
};

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

} // namespace crrn::cli
