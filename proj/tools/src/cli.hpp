#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ctxpath/error.hpp"

namespace ctxpath::cli {

// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kIoError = 2,
    kStrictWarning = 3,
    kFormatError = 4,
    kRunFailure = 5,
};

int exit_code_for(ErrorCode code) noexcept;

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ctxpath::cli
