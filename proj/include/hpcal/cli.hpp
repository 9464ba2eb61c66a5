#pragma once

#include <iosfwd>

namespace hpcal::cli {

enum ExitCode : int {
    kOk = 0,
    kError = 1,
    // The command ran, but at least one track failed or carries a failure flag.
    kPartialFailure = 2,
    kUsage = 64,
};

// Entry point of the `hpcal` tool. Output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hpcal::cli
