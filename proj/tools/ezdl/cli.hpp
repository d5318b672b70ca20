#pragma once

#include <ostream>

namespace ezdl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Parses argv, runs one subcommand and returns the process exit code.
/// Results go to files or `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ezdl::cli
