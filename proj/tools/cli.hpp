#pragma once

#include <iosfwd>

namespace qmini::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitExecution = 2;

/// Entry point of the `qmini` tool. Writes normal output to `out` and
/// diagnostics to `err`; returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qmini::cli
