#pragma once

#include <ostream>

namespace rpgrasp::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDataError = 2, kNoFeasible = 3 };

/// Runs one command line (argv[0] is the program name). Normal output goes to
/// `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rpgrasp::cli
