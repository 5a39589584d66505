#pragma once

#include <iosfwd>

namespace oogrisk::cli {

/// Exit codes of `oogrisk`.
enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kUnbounded = 2,
};

/// Entry point shared by the executable and the tests. Reads OOG_RISK_THREADS
/// when --threads is absent.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace oogrisk::cli
