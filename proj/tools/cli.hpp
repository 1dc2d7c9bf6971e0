#pragma once

#include <iosfwd>

namespace gsanss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitData = 4;
inline constexpr int kExitMismatch = 5;

/// Runs one `gsanss` invocation; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gsanss::cli
