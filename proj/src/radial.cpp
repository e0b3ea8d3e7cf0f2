#include "soliton/radial.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "soliton/errors.hpp"

namespace soliton {

namespace {

struct Segment {
  std::size_t lo;
  double t, width;
};

Segment locate(const std::vector<double>& r, double s) {
  if (!(s >= 0.0)) throw ArgumentError("radius must be nonnegative");
  if (s > r.back()) {
    throw RangeError("radius " + std::to_string(s) + " beyond profile r_max " + std::to_string(r.back()));
  }
  auto it = std::upper_bound(r.begin(), r.end(), s);
  std::size_t hi = static_cast<std::size_t>(it - r.begin());
  hi = std::clamp<std::size_t>(hi, 1, r.size() - 1);
  const std::size_t lo = hi - 1;
  const double width = r[hi] - r[lo];
  return {lo, (s - r[lo]) / width, width};
}

double hermite(double y0, double d0, double y1, double d1, double t, double width) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * width * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * width * d1;
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr std::array<double, 7> kB{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kBStar{5179.0 / 57600,    0.0,           7571.0 / 16695, 393.0 / 640,
                                       -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

using State = std::array<double, 2>;  // (psi, psi')

}  // namespace

double RadialProfile::value(double s) const {
  const auto seg = locate(r, s);
  return hermite(phi[seg.lo], dphi[seg.lo], phi[seg.lo + 1], dphi[seg.lo + 1], seg.t, seg.width);
}

double RadialProfile::slope(double s) const {
  const auto seg = locate(r, s);
  return hermite(dphi[seg.lo], ddphi[seg.lo], dphi[seg.lo + 1], ddphi[seg.lo + 1], seg.t, seg.width);
}

double radial_second_derivative(const SolitonParams& params, double r, double dphi) {
  const double w2 = 1.0 - dphi * dphi;
  if (r == 0.0) return (params.c - 1.0) / params.dim;
  return w2 * (params.c * std::sqrt(w2) - 1.0 - (params.dim - 1) * dphi / r);
}

RadialProfile solve_radial(const SolitonParams& params, double r_max, double tol,
                           const RadialOptions& options) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ArgumentError("r_max must be positive");
  if (!(tol > 0.0)) throw ArgumentError("tolerance must be positive");
  const double c = params.c;
  const int n = params.dim;

  RadialProfile prof;
  prof.params = params;
  auto push = [&](double r, const State& y) {
    prof.r.push_back(r);
    prof.phi.push_back(y[0]);
    prof.dphi.push_back(y[1]);
    prof.ddphi.push_back(radial_second_derivative(params, r, y[1]));
  };

  const double curv0 = (c - 1.0) / n;
  push(0.0, {0.0, 0.0});
  double r = std::min(options.r_start, r_max);
  State y{0.5 * curv0 * r * r, curv0 * r};
  push(r, y);

  auto rhs = [&](double rr, const State& s, State& out) {
    if (!(std::abs(s[1]) < 1.0)) return false;
    out = {s[1], radial_second_derivative(params, rr, s[1])};
    return std::isfinite(out[1]);
  };

  double step = std::min(options.r_start, options.max_step);
  std::array<State, 7> k{};
  if (!rhs(r, y, k[0])) throw IntegrationFailure("invalid state at series start");
  long steps = 0;
  while (r_max - r > 1e-13 * std::max(1.0, r_max)) {
    if (++steps > options.max_steps) throw IntegrationFailure("step budget exhausted");
    step = std::min({step, options.max_step, r_max - r});
    if (step < 1e-14 * std::max(1.0, r)) {
      throw IntegrationFailure("step size collapsed at r = " + std::to_string(r));
    }
    bool ok = true;
    for (int s = 1; s < 7 && ok; ++s) {
      State ys = y;
      for (int j = 0; j < s; ++j) {
        ys[0] += step * kA[s][j] * k[static_cast<std::size_t>(j)][0];
        ys[1] += step * kA[s][j] * k[static_cast<std::size_t>(j)][1];
      }
      ok = rhs(r + kC[static_cast<std::size_t>(s)] * step, ys, k[static_cast<std::size_t>(s)]);
    }
    if (!ok) {
      step *= 0.25;
      continue;
    }
    State y5 = y, err{0.0, 0.0};
    for (std::size_t s = 0; s < 7; ++s) {
      for (std::size_t m = 0; m < 2; ++m) {
        y5[m] += step * kB[s] * k[s][m];
        err[m] += step * (kB[s] - kBStar[s]) * k[s][m];
      }
    }
    double enorm = 0.0;
    for (std::size_t m = 0; m < 2; ++m) {
      const double scale = tol * (1.0 + std::max(std::abs(y[m]), std::abs(y5[m])));
      enorm = std::max(enorm, std::abs(err[m]) / scale);
    }
    if (enorm <= 1.0) {
      r += step;
      y = y5;
      if (!(y[1] < 1.0)) throw IntegrationFailure("psi' reached the light cone at r = " + std::to_string(r));
      k[0] = k[6];  // first-same-as-last
      push(r, y);
    }
    const double fac = enorm > 0.0 ? 0.9 * std::pow(enorm, -0.2) : 5.0;
    step *= std::clamp(fac, 0.2, 5.0);
  }
  return prof;
}

AsymptoticFit fit_log_linear(std::span<const double> r, std::span<const double> y) {
  if (r.size() != y.size()) throw DimensionError("sample arrays differ in length");
  if (r.size() < 10) throw ArgumentError("asymptotic fit needs at least 10 samples in the window");
  const auto m = static_cast<Eigen::Index>(r.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double ri = r[static_cast<std::size_t>(i)];
    if (!(ri > 0.0)) throw ArgumentError("fit radii must be positive");
    a(i, 0) = ri;
    a(i, 1) = std::log(ri);
    a(i, 2) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(b);
  AsymptoticFit fit;
  fit.slope = coef(0);
  fit.logcoef = coef(1);
  fit.offset = coef(2);
  fit.r1 = r.front();
  fit.r2 = r.back();
  fit.rms_residual = std::sqrt((a * coef - b).squaredNorm() / static_cast<double>(m));
  fit.samples = r.size();
  return fit;
}

AsymptoticFit asymptotic_fit(const RadialProfile& profile, double r1, double r2) {
  if (!(r2 > r1) || !(r1 >= 10.0)) throw ArgumentError("fit window needs r2 > r1 >= 10");
  if (r2 > profile.r_max()) throw RangeError("fit window extends beyond the profile");
  std::vector<double> rs, ys;
  for (std::size_t i = 0; i < profile.r.size(); ++i) {
    if (profile.r[i] >= r1 && profile.r[i] <= r2) {
      rs.push_back(profile.r[i]);
      ys.push_back(profile.phi[i]);
    }
  }
  AsymptoticFit fit = fit_log_linear(rs, ys);
  fit.r1 = r1;
  fit.r2 = r2;
  return fit;
}

double maximal_barrier_integral(double h_param, double s, int n) {
  if (!(h_param > 0.0) || !std::isfinite(h_param)) throw ArgumentError("barrier parameter h must be positive");
  if (!(s >= 0.0) || !std::isfinite(s)) throw ArgumentError("barrier radius must be nonnegative");
  if (n < 1) throw ArgumentError("dimension must be >= 1");
  if (s == 0.0) return 0.0;
  const int power = 2 * n - 2;
  auto integrand = [&](double t) { return h_param / std::sqrt(std::pow(t, power) + h_param * h_param); };
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(integrand, 0.0, s, 30, 1e-13);
}

HeightFn translated_radial(std::shared_ptr<const RadialProfile> profile, const Vec2& shift,
                           double offset) {
  if (profile->params.dim != 2) throw ArgumentError("translated radial solutions are planar (n = 2)");
  return [profile = std::move(profile), shift, offset](const Vec2& x) {
    return offset + profile->value((x + shift).norm());
  };
}

}  // namespace soliton
