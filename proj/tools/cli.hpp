#pragma once

#include <iosfwd>

namespace l0erm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace l0erm::cli
