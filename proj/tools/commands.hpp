#pragma once

#include <iosfwd>

namespace patchfill::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitProcessing = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `inpaint` tool. Diagnostics go to `err`, reports and
/// CSV written to standard output go to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace patchfill::cli
