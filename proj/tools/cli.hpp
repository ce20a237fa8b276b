#pragma once

#include <iosfwd>

namespace eipl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `eipl` tool. Output goes to `out`, diagnostics and
/// usage help on errors to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eipl::cli
