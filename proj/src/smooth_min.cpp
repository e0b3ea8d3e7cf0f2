#include "soliton/smooth_min.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "soliton/errors.hpp"

namespace soliton {

double smooth_min2(double a, double b, double delta) {
  const double half = 0.5 * (a - b);
  return 0.5 * (a + b) - std::hypot(half, delta);
}

double smooth_min(std::span<const double> xs, double delta) {
  const std::size_t n = xs.size();
  if (n < 2) throw ArgumentError("smooth_min needs at least two arguments");
  if (n > 20) throw ArgumentError("smooth_min supports at most 20 arguments");
  if (!(delta >= 0.0)) throw ArgumentError("smooth_min needs delta >= 0");

  // mu[S] for every subset S with |S| >= 2, built up by subset size.
  const std::uint32_t full = (1u << n) - 1u;
  std::vector<double> mu(static_cast<std::size_t>(full) + 1, 0.0);
  for (std::uint32_t s = 1; s <= full; ++s) {
    const int size = std::popcount(s);
    if (size == 1) {
      mu[s] = xs[static_cast<std::size_t>(std::countr_zero(s))];
      continue;
    }
    double acc = 0.0;
    for (std::uint32_t rest = s; rest != 0; rest &= rest - 1) {
      const int i = std::countr_zero(rest);
      const std::uint32_t without = s & ~(1u << i);
      // For |S| = 2 both orders give smooth_min2 itself.
      acc += smooth_min2(xs[static_cast<std::size_t>(i)], mu[without], delta);
    }
    mu[s] = acc / size;
  }
  return mu[full];
}

}  // namespace soliton
