#pragma once

#include <iosfwd>

namespace ddm::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kCheckFailed = 2 };

// Parses argv and runs one subcommand. JSON results go to `out`, messages
// and usage text to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddm::cli
