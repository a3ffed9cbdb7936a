#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "benchoracle/errors.hpp"

namespace benchoracle::cli {

// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,  // bad flags or failed validation
  kParse = 2,  // unparseable intent or CSV
  kPolicy = 3,
  kIo = 4,
  kDivergence = 5,
  kMeasurement = 6,
};

int exit_code_for(ErrorCategory category);

// Entry point shared by the binary and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace benchoracle::cli
