#pragma once

#include <iosfwd>

namespace stochograd {

inline constexpr int kExitUsage = 64;
inline constexpr int kExitConfig = 65;
inline constexpr int kExitDiverged = 2;

/// Entry point of the `stochograd` tool.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stochograd
