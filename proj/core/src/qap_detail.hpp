#pragma once

#include <cmath>

namespace blindmatch::detail {

// Reduced costs within this distance of zero are treated as exact zeros so
// that degenerate LAPs see the same ties however the value was accumulated.
inline constexpr double kZeroSnap = 1e-12;

// Tie tolerance handed to JV inside the dual ascent, for the same reason.
inline constexpr double kTieTol = 1e-11;

inline double snap(double x) { return std::abs(x) < kZeroSnap ? 0.0 : x; }

}  // namespace blindmatch::detail
