#pragma once

#include <iosfwd>

namespace odis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point shared by the executable and the tests. Normal output goes to
/// `out`, diagnostics and usage text to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace odis::cli
