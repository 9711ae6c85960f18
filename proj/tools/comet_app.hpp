#pragma once

#include <iosfwd>

namespace comet {

enum ExitCode { kOk = 0, kValidation = 1, kMismatch = 2, kIoError = 3 };

/// Entry point of the `comet` tool; output goes to `out` and `err`.
int run_cli(int argc, char** argv);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace comet
