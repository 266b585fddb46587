#pragma once

#include <iosfwd>

namespace acre::cli {

/// Exit codes shared by every subcommand.
enum Exit : int { kOk = 0, kInvalid = 1, kIoError = 2 };

/// Entry point of the `acre` tool; writes reports to `out` and diagnostics
/// to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace acre::cli
