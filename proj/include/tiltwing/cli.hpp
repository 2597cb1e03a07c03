#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tiltwing {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,        // bad arguments, unreadable or invalid input files
    kExitDiverged = 2,     // simulation left the envelope / went non-finite
    kExitFitFailed = 3,    // sysid or feed-forward fit did not converge
    kExitCheckFailed = 4,  // `alloc check` found a round-trip violation
};

// Entry point of the `tiltwing` tool; args excludes the program name.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tiltwing
