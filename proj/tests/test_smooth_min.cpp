#include <doctest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "smooth_min_props.hpp"
#include "soliton/errors.hpp"
#include "soliton/smooth_min.hpp"

using namespace soliton;

TEST_SUITE("smooth_min") {

TEST_CASE("examples") {
  CHECK(smooth_min2(3.0, 3.0, 0.1) == doctest::Approx(2.9).epsilon(1e-15));
  const std::vector<double> xs{1.0, 2.0, 3.0};
  CHECK(smooth_min(xs, 0.0) == 1.0);
  const std::vector<double> pair{3.0, 3.0};
  CHECK(smooth_min(pair, 0.1) == doctest::Approx(2.9).epsilon(1e-15));
}

TEST_CASE("argument errors") {
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(smooth_min(one, 0.1), ArgumentError);
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(smooth_min(two, -0.1), ArgumentError);
}

TEST_CASE("memoised evaluation matches the plain recursion") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int n = 2; n <= 6; ++n) {
    for (double delta : {0.0, 1e-3, 0.1, 1.0}) {
      for (int t = 0; t < 20; ++t) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (double& v : x) v = u(rng);
        CHECK(smooth_min(x, delta) == doctest::Approx(oracle::mu_recursive(x, delta)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("lemma properties on random inputs") {
  for (int n = 2; n <= 6; ++n) {
    for (double delta : {0.0, 1e-3, 1e-1}) {
      const auto rep = smooth_min_properties(n, delta, 1000, 42 + static_cast<std::uint64_t>(n));
      INFO(rep.first_failure);
      CHECK(rep.failures == 0);
      if (delta == 0.0) CHECK(rep.max_exact_min_error <= 1e-12);
    }
  }
}

TEST_CASE("quadratic euler bound fails for equal negative inputs") {
  // For n = 2 the sum equals mu^2 - delta^2 + (x_1 + x_2) delta^2 / s with
  // s = sqrt(((x_1 - x_2)/2)^2 + delta^2).
  const double delta = 0.1, a = -3.6;
  const std::vector<double> x{a, a};
  const double m = smooth_min(x, delta);
  CHECK(m == doctest::Approx(a - delta).epsilon(1e-14));
  const double lhs = 0.5 * a * a + 0.5 * a * a;  // both partials are 1/2
  const double bound = m * m - 2.0 * delta * delta - 2.0 * delta / 4.0 * std::abs(2.0 * a);
  CHECK(lhs == doctest::Approx(m * m - delta * delta + 2.0 * a * delta).epsilon(1e-14));
  CHECK(lhs < bound);
}

}
