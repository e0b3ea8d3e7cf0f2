#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soliton/elliptic.hpp"
#include "soliton/field.hpp"
#include "soliton/params.hpp"
#include "soliton/radial.hpp"

namespace soliton {

/// Data f on the circle of radius ctilde, sampled at the uniform angles
/// theta_k = 2 pi k / N. `m_bound` is the constant M of the quadratic
/// deviation bound
///   |f(x) - f(y) - Df(y).(x - y)| <= M |x - y|^2,  x, y on the circle.
class SphereFunction {
 public:
  /// Takes samples at uniform angles. Without `m_bound` M is estimated from
  /// the data; a supplied bound is validated on random pairs and rejected
  /// with BadCurvatureBound when violated.
  static SphereFunction from_samples(std::vector<double> values, const SolitonParams& params,
                                     std::optional<double> m_bound = std::nullopt,
                                     std::uint64_t seed = 42);
  /// amplitude * cos(frequency * theta).
  static SphereFunction cosine(double amplitude, int frequency, const SolitonParams& params,
                               int samples = 720);
  static SphereFunction constant(double value, const SolitonParams& params, int samples = 720);
  /// CSV with header theta,f on a uniform grid starting at 0.
  static SphereFunction from_csv(const std::string& path, const SolitonParams& params,
                                 std::optional<double> m_bound = std::nullopt);

  const SolitonParams& params() const { return params_; }
  const std::vector<double>& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double spacing() const;
  double m_bound() const { return m_bound_; }

  /// f at ctilde (cos theta, sin theta); periodic cubic Hermite between samples.
  double value(double theta) const;
  /// d f / d theta.
  double dtheta(double theta) const;
  /// Tangential gradient Df at ctilde (cos theta, sin theta) in the plane.
  Vec2 gradient(double theta) const;

  /// Largest |f(x) - f(y) - Df(y).(x - y)| / |x - y|^2 over all sample pairs.
  double required_bound() const;
  /// Largest excess of the deviation over M |x - y|^2 on `pairs` random pairs.
  double bound_violation(int pairs, std::uint64_t seed = 42) const;

 private:
  double node_derivative(int k) const;
  SolitonParams params_;
  std::vector<double> values_;
  std::vector<double> derivs_;
  double m_bound_ = 0.0;
};

struct SupportingPlanes {
  Vec2 p1 = Vec2::Zero();
  Vec2 p2 = Vec2::Zero();
};

/// p1,2 = Df(ctilde y) +- 2 M ctilde y at y = (cos angle, sin angle).
SupportingPlanes supporting_planes(const SphereFunction& f, double y_angle);

/// Largest violation of
///   p1(y).(x - y) <= f(x) - f(y) <= p2(y).(x - y),  x, y on the circle,
/// over random pairs (<= 0 when both inequalities hold).
double supporting_plane_violation(const SphereFunction& f, int pairs, std::uint64_t seed = 42);

/// Lower envelope q1 = max_y z1(.; y) and upper envelope q2 = min_y z2(.; y)
/// of the translated radial solutions
///   z(x; y) = f(ctilde y) - p(y).ctilde y - c_psi + psi(|x + p(y)|)
/// where c_psi is the constant of the radial asymptote, so that the
/// envelopes behave like ctilde r - (n - 1)/C^2 log r + f at infinity.
class Envelopes {
 public:
  Envelopes(const SphereFunction& f, std::shared_ptr<const RadialProfile> profile,
            int n_angles = 720);

  double q1(const Vec2& x) const;
  double q2(const Vec2& x) const;
  HeightFn q1_fn() const;
  HeightFn q2_fn() const;

  const std::vector<double>& y_samples() const { return angles_; }
  double profile_constant() const { return c_psi_; }
  const RadialProfile& profile() const { return *profile_; }

 private:
  std::shared_ptr<const RadialProfile> profile_;
  std::vector<double> angles_;
  std::vector<Vec2> shift1_, shift2_;
  std::vector<double> offset1_, offset2_;
  double c_psi_ = 0.0;
};

/// Radial profile long enough for envelope evaluation out to `radius`.
std::shared_ptr<const RadialProfile> envelope_profile(const SphereFunction& f, double radius);

struct LevelReport {
  double level = 0.0;
  int unknowns = 0;
  SolveReport solve;
  double lower_gap = 0.0;  // min(u - q1)
  double upper_gap = 0.0;  // min(q2 - u)
};

struct ExhaustionOptions {
  int n_angles = 720;
  NewtonOptions newton;
  /// Sandwich tolerance; negative selects 1e-2 (1 + h).
  double sandwich_tol = -1.0;
};

struct ExhaustionResult {
  std::vector<double> levels;
  std::vector<ScalarField> solutions;
  std::vector<LevelReport> reports;
  /// max |u_{m_{k+1}} - u_{m_k}| over the nodes in the compact disk.
  std::vector<double> cauchy_gaps;
  bool gaps_nonincreasing = true;
  /// Last solution restricted to the compact disk.
  ScalarField final;
  double compact_radius = 0.0;
  double h = 0.0;
  std::shared_ptr<const Envelopes> envelopes;
};

/// Solves u = m on the boundary of G_m = {q1 < m} for each level, checks
/// q1 <= u_m <= q2 and tracks the gaps between consecutive levels on the
/// disk |x| <= compact_radius.
ExhaustionResult exhaustion_construct(const SphereFunction& f, const SolitonParams& params,
                                      std::vector<double> levels, double compact_radius, double h,
                                      const ExhaustionOptions& options = {});

/// Values of u(r theta) - ctilde r + (n - 1)/C^2 log r on a uniform angle grid,
/// with their spread and their distance to f.
struct AngularProfile {
  double radius = 0.0;
  std::vector<double> theta;
  std::vector<double> values;
  double mean = 0.0;
  double std_dev = 0.0;
  double sup_deviation = 0.0;  // max |values - f|
};

AngularProfile angular_profile(const HeightFn& u, const SphereFunction& f, double radius,
                               int samples = 360);

/// Standard deviation of u on the circle of the given radius.
double angular_std(const HeightFn& u, double radius, int samples = 360);

std::vector<Vec2> uniform_directions(int count);

struct ConeSamples {
  std::vector<Vec2> directions;
  std::vector<double> values;
  std::vector<double> h_used;
  /// u^h(direction) = (u(h direction) - u(0)) / h per direction and h.
  std::vector<std::vector<double>> rescaled;
  /// Smallest increment u^{h_{k+1}} - u^{h_k} seen.
  double min_increment = 0.0;
};

/// Blow-down u^h(x) = (u(hx) - u(0)) / h along unit directions. The limit is
/// extrapolated from the three largest h with the model
///   u^h = V + beta log(h) / h + gamma / h
/// (two h values: V + gamma / h; one: the value itself). Throws NotConvex
/// when u^h decreases in h by more than `monotone_tol`.
ConeSamples blowdown(const HeightFn& u, const std::vector<Vec2>& directions,
                     std::vector<double> h_values, double monotone_tol = 1e-10);

struct EikonalReport {
  double max_deviation = 0.0;  // max | |DV| - ctilde | over resolved directions
  int resolved = 0;
  std::vector<int> excluded;  // direction indices near gradient jumps
};

/// |DV|^2 = V^2 + V'^2 on unit directions, V' from fourth-order periodic
/// differences. Directions must be uniformly spaced in angle. A direction is
/// a kink when its one-sided slopes differ by more than `kink_tol`; it and
/// its two neighbours on either side are excluded.
EikonalReport eikonal_check(const ConeSamples& cone, const SolitonParams& params,
                            double kink_tol = 0.05);

/// max over pairs of |V(x) - V(y)| - ctilde |x - y|.
double cone_lipschitz_excess(const ConeSamples& cone, const SolitonParams& params);

/// Height on R^d taking the point as a span of coordinates.
using PointFn = std::function<double(std::span<const double>)>;

struct LiftedSolution {
  PointFn u;
  double lambda = 1.0;
  double c_reduced = 0.0;
  int reduced_dim = 0;
  int dim = 0;
};

/// Lifts a solution h of the reduced equation in the first `reduced_dim`
/// coordinates with constant lambda C to
///   u(x', x'') = a.x'' + lambda^2 h(x' / lambda),  lambda = sqrt(1 - |a|^2),
/// a solution with constant C in reduced_dim + |a| dimensions.
LiftedSolution split_lift(PointFn reduced, int reduced_dim, std::vector<double> a,
                          const SolitonParams& params);

}  // namespace soliton
