#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covstein::cli {

inline constexpr const char* kToolVersion = "covstein 1.0.0";

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kValidityError = 3,
  kNumericalError = 4,
};

/// Runs the command line; results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count: COVERAGE_STEIN_THREADS when set, else `requested`, else
/// the hardware thread count.
unsigned resolve_parallelism(unsigned requested);

}  // namespace covstein::cli
