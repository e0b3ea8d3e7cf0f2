#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "soliton/field.hpp"
#include "soliton/params.hpp"

namespace soliton {

/// Rotationally symmetric soliton psi(r), normalised psi(0) = 0, stored on
/// the integrator's adaptive nodes and evaluated by cubic Hermite
/// interpolation.
struct RadialProfile {
  SolitonParams params;
  std::vector<double> r;
  std::vector<double> phi;
  std::vector<double> dphi;
  std::vector<double> ddphi;

  double r_max() const { return r.back(); }
  /// psi(s); throws RangeError beyond r_max.
  double value(double s) const;
  /// psi'(s); throws RangeError beyond r_max.
  double slope(double s) const;
};

struct RadialOptions {
  /// Radius where the series start hands over to the integrator.
  double r_start = 1e-4;
  /// Upper bound on the step, keeps interpolation between nodes accurate.
  double max_step = 0.25;
  long max_steps = 2'000'000;
};

/// psi'' for the radial reduction of the soliton equation:
///   psi'' = (1 - psi'^2) (C sqrt(1 - psi'^2) - 1 - (n - 1) psi' / r).
double radial_second_derivative(const SolitonParams& params, double r, double dphi);

/// Integrates from the origin with an embedded Dormand-Prince 5(4) pair at
/// local tolerance `tol`. The first segment [0, r_start] uses the series
/// psi = (C - 1) r^2 / (2n).
RadialProfile solve_radial(const SolitonParams& params, double r_max, double tol = 1e-10,
                           const RadialOptions& options = {});

struct AsymptoticFit {
  double slope = 0.0;
  double logcoef = 0.0;
  double offset = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double rms_residual = 0.0;
  std::size_t samples = 0;
};

/// Least-squares fit y ~ a r + b log r + c over the given samples.
AsymptoticFit fit_log_linear(std::span<const double> r, std::span<const double> y);

/// Fits psi(r) ~ a r + b log r + c on the profile nodes in [r1, r2].
/// Expected: a -> ctilde, b -> -(n - 1)/C^2.
AsymptoticFit asymptotic_fit(const RadialProfile& profile, double r1, double r2);

/// Integral over [0, s] of h / sqrt(t^(2n-2) + h^2): the radial maximal
/// surface profile used as a barrier. Adaptive Gauss-Kronrod.
double maximal_barrier_integral(double h_param, double s, int n);

/// x -> offset + psi(|x + shift|).
HeightFn translated_radial(std::shared_ptr<const RadialProfile> profile, const Vec2& shift,
                           double offset);

}  // namespace soliton
