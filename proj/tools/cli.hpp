#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vdamf::cli {

enum ExitCode { kOk = 0, kBadInput = 2, kRuntimeFailure = 3 };

/// Runs the command line `args` (without the program name). Results go to
/// `out`; errors are written to `err` as a JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vdamf::cli
