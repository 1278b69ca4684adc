#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace weakmeter {

// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitBadInput = 1,          // argument, parse or validation failure
    kExitAlgebraFailure = 2,    // verify-algebra found a residual above tolerance
    kExitTruncation = 3,        // TruncationError / TruncationLeak
    kExitSelection = 4,         // orthogonal selections or annihilated post-selection
    kExitNoSamples = 5,         // no ensemble sample passed post-selection
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Reports go to --out when given, otherwise to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace weakmeter
