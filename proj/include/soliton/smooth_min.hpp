#pragma once

#include <span>

namespace soliton {

/// Smooth surrogate for min(a, b):
///   (a + b)/2 - sqrt(((a - b)/2)^2 + delta^2).
double smooth_min2(double a, double b, double delta);

/// Smooth surrogate for min(x_1..x_n), n >= 2, defined recursively by
/// averaging smooth_min2(x_i, mu_{n-1}(x without x_i)) over i. Symmetric,
/// nondecreasing and concave in each argument, within n*delta of the true
/// minimum from below. delta = 0 recovers the exact minimum.
///
/// Evaluated over subsets with memoisation, O(2^n n); n is capped at 20.
double smooth_min(std::span<const double> xs, double delta);

}  // namespace soliton
