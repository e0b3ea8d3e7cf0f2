#include "smooth_min_props.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "soliton/smooth_min.hpp"

SmoothMinReport smooth_min_properties(int n, double delta, int inputs, std::uint64_t seed) {
  using soliton::smooth_min;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> pos(0.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SmoothMinReport rep;
  auto mu = [delta](const std::vector<double>& x) { return smooth_min(x, delta); };
  auto fail = [&](const std::string& what, const std::vector<double>& x) {
    if (rep.failures++ == 0) {
      std::ostringstream s;
      s << what << " at n=" << n << " delta=" << delta << " x=(";
      for (double v : x) s << v << ' ';
      s << ')';
      rep.first_failure = s.str();
    }
  };
  for (int t = 0; t < inputs; ++t) {
    std::vector<double> x(static_cast<std::size_t>(n));
    // Every other input is nonnegative so the quadratic sum is exercised.
    for (double& v : x) v = (t % 2 == 0) ? u(rng) : pos(rng);
    ++rep.inputs;
    const double m = mu(x);
    const double scale = 1.0 + std::abs(m);
    const double lo = *std::min_element(x.begin(), x.end());

    // 3. min - n delta <= mu <= min.
    if (m > lo + 1e-12 * scale || m < lo - n * delta - 1e-12 * scale) fail("min sandwich", x);
    if (delta == 0.0) rep.max_exact_min_error = std::max(rep.max_exact_min_error, std::abs(m - lo));

    // 1. symmetry.
    std::vector<double> perm = x;
    std::shuffle(perm.begin(), perm.end(), rng);
    if (std::abs(mu(perm) - m) > 1e-12 * scale) fail("symmetry", x);

    // 1. monotone nondecreasing in each argument.
    const int i = static_cast<int>(rng() % static_cast<unsigned>(n));
    std::vector<double> up = x;
    up[static_cast<std::size_t>(i)] += unit(rng);
    if (mu(up) < m - 1e-12 * scale) fail("monotonicity", x);

    // 1. concave along a random segment.
    std::vector<double> y(x.size()), mid(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      y[k] = u(rng);
      mid[k] = 0.5 * (x[k] + y[k]);
    }
    if (mu(mid) < 0.5 * (m + mu(y)) - 1e-12 * scale) fail("concavity", x);

    // Central-difference gradient, step 1e-6 (1 + |x_i|).
    std::vector<double> grad(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double s = 1e-6 * (1.0 + std::abs(x[k]));
      std::vector<double> a = x, b = x;
      a[k] += s;
      b[k] -= s;
      grad[k] = (mu(a) - mu(b)) / (2.0 * s);
    }
    const double fd_tol = 1e-5;
    double euler = 0.0, euler2 = 0.0, pair_sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      // 2. each partial derivative at most 1 (and nonnegative by monotonicity).
      if (grad[k] > 1.0 + fd_tol || grad[k] < -fd_tol) fail("derivative bound", x);
      euler += grad[k] * x[k];
      euler2 += grad[k] * x[k] * x[k];
      for (std::size_t l = k + 1; l < x.size(); ++l) pair_sum += std::abs(x[k] + x[l]);
    }
    const double etol = fd_tol * (1.0 + std::abs(euler));
    // 4. mu <= sum mu_i x_i <= mu + n delta.
    if (euler < m - etol || euler > m + n * delta + etol) fail("euler sum", x);
    // 4. sum mu_i x_i^2 >= mu^2 - n delta^2 - (n delta / 4) sum_{i<j} |x_i + x_j|,
    // which can fail for negative inputs (x_1 = x_2 = -3.6, delta = 0.1).
    if (lo < 0.0) continue;
    const double bound = m * m - n * delta * delta - n * delta / 4.0 * pair_sum;
    if (euler2 < bound - fd_tol * (1.0 + std::abs(euler2)) * 10.0) fail("quadratic euler sum", x);
  }
  return rep;
}
