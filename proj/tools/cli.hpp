#pragma once

#include <iosfwd>

namespace flowdep::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStageFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the flowdep tool. Messages go to `out` (help, version) and
/// `err` (progress, errors).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flowdep::app
