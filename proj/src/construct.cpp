#include "soliton/construct.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "soliton/domain.hpp"
#include "soliton/errors.hpp"

namespace soliton {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  return t < 0.0 ? t + kTwoPi : t;
}

Vec2 circle_point(double ctilde, double theta) {
  return ctilde * Vec2(std::cos(theta), std::sin(theta));
}

}  // namespace

SphereFunction SphereFunction::from_samples(std::vector<double> values, const SolitonParams& params,
                                            std::optional<double> m_bound, std::uint64_t seed) {
  if (params.dim != 2) throw DimensionError("sphere data is supported on the circle only (n = 2)");
  if (values.size() < 8) throw ArgumentError("sphere data needs at least 8 samples");
  for (double v : values) {
    if (!std::isfinite(v)) throw ArgumentError("sphere data must be finite");
  }
  SphereFunction f;
  f.params_ = params;
  f.values_ = std::move(values);
  const int n = f.size();
  f.derivs_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) f.derivs_[static_cast<std::size_t>(k)] = f.node_derivative(k);

  if (m_bound) {
    if (!(*m_bound >= 0.0)) throw BadCurvatureBound("M must be nonnegative");
    f.m_bound_ = *m_bound;
    const double excess = f.bound_violation(10000, seed);
    if (excess > 1e-12 * (1.0 + f.m_bound_)) {
      std::ostringstream msg;
      msg << "M = " << f.m_bound_ << " violates the quadratic deviation bound by " << excess;
      throw BadCurvatureBound(msg.str());
    }
    return f;
  }

  // Half the largest second derivative along the chord, with a 1.5 safety
  // factor, raised to what the sample pairs demand if that is larger.
  const double d = f.spacing();
  double second = 0.0;
  auto at = [&](int k) { return f.values_[static_cast<std::size_t>(((k % n) + n) % n)]; };
  for (int k = 0; k < n; ++k) {
    const double fpp = (-at(k + 2) + 16.0 * at(k + 1) - 30.0 * at(k) + 16.0 * at(k - 1) - at(k - 2)) / (12.0 * d * d);
    second = std::max(second, std::abs(fpp));
  }
  const double ct2 = params.ctilde * params.ctilde;
  f.m_bound_ = std::max(1.5 * 0.5 * second / ct2, 1.05 * f.required_bound());
  return f;
}

SphereFunction SphereFunction::cosine(double amplitude, int frequency, const SolitonParams& params, int samples) {
  if (samples < 8) throw ArgumentError("need at least 8 samples");
  std::vector<double> v(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) v[static_cast<std::size_t>(k)] = amplitude * std::cos(frequency * kTwoPi * k / samples);
  return from_samples(std::move(v), params);
}

SphereFunction SphereFunction::constant(double value, const SolitonParams& params, int samples) {
  return from_samples(std::vector<double>(static_cast<std::size_t>(samples), value), params);
}

SphereFunction SphereFunction::from_csv(const std::string& path, const SolitonParams& params,
                                        std::optional<double> m_bound) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "theta,f") throw Error(path + ": expected header theta,f");
  std::vector<double> theta, values;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(path + ": malformed row '" + line + "'");
    theta.push_back(std::stod(line.substr(0, comma)));
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  const double d = kTwoPi / static_cast<double>(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (std::abs(theta[k] - d * static_cast<double>(k)) > 1e-9) {
      throw ArgumentError(path + ": theta must be the uniform grid 2 pi k / N");
    }
  }
  return from_samples(std::move(values), params, m_bound);
}

double SphereFunction::spacing() const { return kTwoPi / size(); }

double SphereFunction::node_derivative(int k) const {
  const int n = size();
  auto at = [&](int j) { return values_[static_cast<std::size_t>(((j % n) + n) % n)]; };
  return (-at(k + 2) + 8.0 * at(k + 1) - 8.0 * at(k - 1) + at(k - 2)) / (12.0 * spacing());
}

double SphereFunction::value(double theta) const {
  const double d = spacing();
  const double s = wrap_angle(theta) / d;
  const int n = size();
  const int k = std::min(static_cast<int>(s), n - 1);
  const double t = s - k;
  const auto a = static_cast<std::size_t>(k), b = static_cast<std::size_t>((k + 1) % n);
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * values_[a] + h10 * d * derivs_[a] + h01 * values_[b] + h11 * d * derivs_[b];
}

double SphereFunction::dtheta(double theta) const {
  const double d = spacing();
  const double s = wrap_angle(theta) / d;
  const int n = size();
  const int k = std::min(static_cast<int>(s), n - 1);
  const double t = s - k;
  const auto a = static_cast<std::size_t>(k), b = static_cast<std::size_t>((k + 1) % n);
  const double d00 = 6 * t * (t - 1), d10 = (1 - t) * (1 - 3 * t);
  const double d01 = -6 * t * (t - 1), d11 = t * (3 * t - 2);
  return (d00 * values_[a] + d01 * values_[b]) / d + d10 * derivs_[a] + d11 * derivs_[b];
}

Vec2 SphereFunction::gradient(double theta) const {
  return (dtheta(theta) / params_.ctilde) * Vec2(-std::sin(theta), std::cos(theta));
}

double SphereFunction::required_bound() const {
  const int n = size();
  const double d = spacing();
  std::vector<Vec2> pts(static_cast<std::size_t>(n)), grads(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = d * k;
    pts[static_cast<std::size_t>(k)] = circle_point(params_.ctilde, t);
    grads[static_cast<std::size_t>(k)] = (derivs_[static_cast<std::size_t>(k)] / params_.ctilde) * Vec2(-std::sin(t), std::cos(t));
  }
  double m = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == j) continue;
      const Vec2 dx = pts[i] - pts[j];
      const double dev = std::abs(values_[i] - values_[j] - grads[j].dot(dx));
      m = std::max(m, dev / dx.squaredNorm());
    }
  }
  return m;
}

double SphereFunction::bound_violation(int pairs, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, size() - 1);
  const double d = spacing();
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < pairs; ++s) {
    const int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    const double ti = d * i, tj = d * j;
    const Vec2 dx = circle_point(params_.ctilde, ti) - circle_point(params_.ctilde, tj);
    const Vec2 g = (derivs_[static_cast<std::size_t>(j)] / params_.ctilde) * Vec2(-std::sin(tj), std::cos(tj));
    const double dev = std::abs(values_[static_cast<std::size_t>(i)] - values_[static_cast<std::size_t>(j)] - g.dot(dx));
    worst = std::max(worst, dev - m_bound_ * dx.squaredNorm());
  }
  return worst;
}

SupportingPlanes supporting_planes(const SphereFunction& f, double y_angle) {
  const Vec2 df = f.gradient(y_angle);
  const Vec2 cy = circle_point(f.params().ctilde, y_angle);
  const double m = f.m_bound();
  return {df + 2.0 * m * cy, df - 2.0 * m * cy};
}

double supporting_plane_violation(const SphereFunction& f, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, f.size() - 1);
  const double d = f.spacing(), ct = f.params().ctilde;
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < pairs; ++s) {
    const int i = pick(rng), j = pick(rng);
    const double tx = d * i, ty = d * j;
    const Vec2 dx = circle_point(ct, tx) - circle_point(ct, ty);
    const double df = f.values()[static_cast<std::size_t>(i)] - f.values()[static_cast<std::size_t>(j)];
    const auto [p1, p2] = supporting_planes(f, ty);
    worst = std::max({worst, p1.dot(dx) - df, df - p2.dot(dx)});
  }
  return worst;
}

namespace {

// psi(r) - ctilde r + (n - 1)/C^2 log r at the end of the profile.
double asymptote_constant(const RadialProfile& p) {
  const double r = p.r_max();
  const SolitonParams& q = p.params;
  return p.value(r) - q.ctilde * r + (q.dim - 1) / (q.c * q.c) * std::log(r);
}

}  // namespace

Envelopes::Envelopes(const SphereFunction& f, std::shared_ptr<const RadialProfile> profile, int n_angles)
    : profile_(std::move(profile)) {
  if (n_angles < 8) throw ArgumentError("envelopes need at least 8 angles");
  if (profile_->params.dim != 2 || std::abs(profile_->params.c - f.params().c) > 1e-14) {
    throw ArgumentError("radial profile does not match the sphere data");
  }
  c_psi_ = asymptote_constant(*profile_);
  const double ct = f.params().ctilde;
  for (int k = 0; k < n_angles; ++k) {
    const double t = kTwoPi * k / n_angles;
    const auto [p1, p2] = supporting_planes(f, t);
    const Vec2 cy = circle_point(ct, t);
    const double fy = f.value(t);
    angles_.push_back(t);
    shift1_.push_back(p1);
    shift2_.push_back(p2);
    offset1_.push_back(fy - p1.dot(cy) - c_psi_);
    offset2_.push_back(fy - p2.dot(cy) - c_psi_);
  }
}

double Envelopes::q1(const Vec2& x) const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < angles_.size(); ++k) {
    m = std::max(m, offset1_[k] + profile_->value((x + shift1_[k]).norm()));
  }
  return m;
}

double Envelopes::q2(const Vec2& x) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < angles_.size(); ++k) {
    m = std::min(m, offset2_[k] + profile_->value((x + shift2_[k]).norm()));
  }
  return m;
}

HeightFn Envelopes::q1_fn() const {
  return [this](const Vec2& x) { return q1(x); };
}

HeightFn Envelopes::q2_fn() const {
  return [this](const Vec2& x) { return q2(x); };
}

std::shared_ptr<const RadialProfile> envelope_profile(const SphereFunction& f, double radius) {
  double pmax = 0.0;
  for (int k = 0; k < f.size(); ++k) {
    const auto [p1, p2] = supporting_planes(f, f.spacing() * k);
    pmax = std::max({pmax, p1.norm(), p2.norm()});
  }
  const double r_max = std::max(radius + pmax + 10.0, 80.0);
  return std::make_shared<const RadialProfile>(solve_radial(f.params(), r_max));
}

ExhaustionResult exhaustion_construct(const SphereFunction& f, const SolitonParams& params,
                                      std::vector<double> levels, double compact_radius, double h,
                                      const ExhaustionOptions& options) {
  if (levels.empty()) throw ArgumentError("need at least one level");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i] > levels[i - 1])) throw ArgumentError("levels must be increasing");
  }
  if (!(h > 0.0) || !(compact_radius > 0.0)) throw ArgumentError("h and compact_radius must be positive");
  if (std::abs(params.c - f.params().c) > 1e-14 || params.dim != 2) {
    throw ArgumentError("sphere data and parameters disagree");
  }

  ExhaustionResult res;
  res.levels = levels;
  res.compact_radius = compact_radius;
  res.h = h;
  const double tol = options.sandwich_tol < 0.0 ? 1e-2 * (1.0 + h) : options.sandwich_tol;

  // Sublevel sets reach roughly (m + c) / ctilde; ray casting probes up to
  // twice as far, so the profile gets generous room.
  double fmax = 0.0;
  for (double v : f.values()) fmax = std::max(fmax, std::abs(v));
  const double reach = (levels.back() + fmax + 10.0) / params.ctilde;
  auto profile = envelope_profile(f, 2.5 * reach + 20.0);
  res.envelopes = std::make_shared<const Envelopes>(f, profile, options.n_angles);
  const Envelopes& env = *res.envelopes;

  for (int k = 0; k < 360; ++k) {
    const Vec2 x = compact_radius * Vec2(std::cos(kTwoPi * k / 360), std::sin(kTwoPi * k / 360));
    if (!(env.q1(x) < levels.front())) {
      throw ArgumentError("the smallest level set does not contain the compact disk");
    }
  }

  for (double m : levels) {
    DirichletProblem problem{params, ConvexDomain::sublevel(env.q1_fn(), m, Vec2::Zero()),
                             BoundaryData::constant(m), h};
    const ScalarField disc = discretize(problem);
    std::vector<double> guess(disc.size());
    for (std::size_t k = 0; k < guess.size(); ++k) guess[k] = env.q1(disc.grid->position(static_cast<int>(k)));
    auto [u, report] = newton_solve(params, disc.with_values(std::move(guess)), options.newton);

    LevelReport lr;
    lr.level = m;
    lr.unknowns = u.grid->unknown_count();
    lr.solve = std::move(report);
    lr.lower_gap = std::numeric_limits<double>::infinity();
    lr.upper_gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < u.grid->unknown_count(); ++k) {
      const Vec2 x = u.grid->position(k);
      const double v = u.values[static_cast<std::size_t>(k)];
      lr.lower_gap = std::min(lr.lower_gap, v - env.q1(x));
      lr.upper_gap = std::min(lr.upper_gap, env.q2(x) - v);
    }
    if (lr.lower_gap < -tol || lr.upper_gap < -tol) {
      std::ostringstream msg;
      msg << "sandwich violated: min(u - q1) = " << lr.lower_gap << ", min(q2 - u) = " << lr.upper_gap
          << ", tolerance " << tol;
      throw ConstructionFailure(m, msg.str());
    }
    res.reports.push_back(std::move(lr));
    res.solutions.push_back(std::move(u));
  }

  for (std::size_t i = 1; i < res.solutions.size(); ++i) {
    const ScalarField& a = res.solutions[i - 1];
    const ScalarField& b = res.solutions[i];
    double gap = 0.0;
    for (int k = 0; k < b.grid->unknown_count(); ++k) {
      const Vec2 x = b.grid->position(k);
      if (x.norm() > compact_radius) continue;
      const int ia = static_cast<int>(std::lround((x.x() - a.grid->origin().x()) / h));
      const int ja = static_cast<int>(std::lround((x.y() - a.grid->origin().y()) / h));
      const int ka = a.grid->index(ia, ja);
      if (ka < 0) continue;
      gap = std::max(gap, std::abs(b.values[static_cast<std::size_t>(k)] - a.values[static_cast<std::size_t>(ka)]));
    }
    res.cauchy_gaps.push_back(gap);
  }
  for (std::size_t i = 1; i < res.cauchy_gaps.size(); ++i) {
    if (res.cauchy_gaps[i] > res.cauchy_gaps[i - 1]) res.gaps_nonincreasing = false;
  }
  res.final = restrict_field(res.solutions.back(), [compact_radius](const Vec2& x) { return x.norm() <= compact_radius; });
  return res;
}

AngularProfile angular_profile(const HeightFn& u, const SphereFunction& f, double radius, int samples) {
  if (!(radius > 0.0) || samples < 1) throw ArgumentError("angular profile needs radius > 0 and samples >= 1");
  const SolitonParams& p = f.params();
  AngularProfile out;
  out.radius = radius;
  const double shift = p.ctilde * radius - (p.dim - 1) / (p.c * p.c) * std::log(radius);
  for (int k = 0; k < samples; ++k) {
    const double t = kTwoPi * k / samples;
    const double v = u(radius * Vec2(std::cos(t), std::sin(t))) - shift;
    out.theta.push_back(t);
    out.values.push_back(v);
    out.sup_deviation = std::max(out.sup_deviation, std::abs(v - f.value(t)));
    out.mean += v;
  }
  out.mean /= samples;
  double var = 0.0;
  for (double v : out.values) var += (v - out.mean) * (v - out.mean);
  out.std_dev = std::sqrt(var / samples);
  return out;
}

double angular_std(const HeightFn& u, double radius, int samples) {
  double mean = 0.0;
  std::vector<double> v;
  for (int k = 0; k < samples; ++k) {
    const double t = kTwoPi * k / samples;
    v.push_back(u(radius * Vec2(std::cos(t), std::sin(t))));
    mean += v.back();
  }
  mean /= samples;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / samples);
}

std::vector<Vec2> uniform_directions(int count) {
  if (count < 1) throw ArgumentError("need at least one direction");
  std::vector<Vec2> d;
  for (int k = 0; k < count; ++k) d.emplace_back(std::cos(kTwoPi * k / count), std::sin(kTwoPi * k / count));
  return d;
}

ConeSamples blowdown(const HeightFn& u, const std::vector<Vec2>& directions, std::vector<double> h_values,
                     double monotone_tol) {
  if (directions.empty() || h_values.empty()) throw ArgumentError("blowdown needs directions and h values");
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    if (!(h_values[i] > 0.0) || (i > 0 && !(h_values[i] > h_values[i - 1]))) {
      throw ArgumentError("h values must be positive and increasing");
    }
  }
  ConeSamples cone;
  cone.directions = directions;
  cone.h_used = h_values;
  cone.min_increment = std::numeric_limits<double>::infinity();
  const double u0 = u(Vec2::Zero());
  const std::size_t nh = h_values.size();
  for (std::size_t d = 0; d < directions.size(); ++d) {
    std::vector<double> row;
    for (double h : h_values) row.push_back((u(h * directions[d]) - u0) / h);
    for (std::size_t k = 1; k < nh; ++k) {
      const double inc = row[k] - row[k - 1];
      cone.min_increment = std::min(cone.min_increment, inc);
      if (inc < -monotone_tol) {
        std::ostringstream msg;
        msg << "u^h decreases between h = " << h_values[k - 1] << " and h = " << h_values[k]
            << " along direction " << d << " (by " << -inc << ")";
        throw NotConvex(msg.str());
      }
    }
    double v = row.back();
    if (nh >= 3) {
      Eigen::Matrix3d a;
      Eigen::Vector3d b;
      for (int i = 0; i < 3; ++i) {
        const double h = h_values[nh - 3 + static_cast<std::size_t>(i)];
        a.row(i) << 1.0, std::log(h) / h, 1.0 / h;
        b(i) = row[nh - 3 + static_cast<std::size_t>(i)];
      }
      v = a.fullPivLu().solve(b)(0);
    } else if (nh == 2) {
      const double h1 = h_values[0], h2 = h_values[1];
      v = (h2 * row[1] - h1 * row[0]) / (h2 - h1);
    }
    cone.values.push_back(v);
    cone.rescaled.push_back(std::move(row));
  }
  if (nh == 1) cone.min_increment = 0.0;
  return cone;
}

EikonalReport eikonal_check(const ConeSamples& cone, const SolitonParams& params, double kink_tol) {
  const int n = static_cast<int>(cone.directions.size());
  if (n < 8) throw ArgumentError("eikonal check needs at least 8 directions");
  const double d = kTwoPi / n;
  const double t0 = std::atan2(cone.directions[0].y(), cone.directions[0].x());
  for (int k = 0; k < n; ++k) {
    const Vec2 expect(std::cos(t0 + d * k), std::sin(t0 + d * k));
    if ((cone.directions[static_cast<std::size_t>(k)] - expect).norm() > 1e-9) {
      throw ArgumentError("eikonal check needs directions uniformly spaced in angle");
    }
  }
  auto v = [&](int k) { return cone.values[static_cast<std::size_t>(((k % n) + n) % n)]; };
  std::vector<bool> skip(static_cast<std::size_t>(n), false);
  for (int k = 0; k < n; ++k) {
    const double jump = std::abs((v(k + 1) - v(k)) - (v(k) - v(k - 1))) / d;
    if (jump > kink_tol) {
      for (int j = k - 2; j <= k + 2; ++j) skip[static_cast<std::size_t>(((j % n) + n) % n)] = true;
    }
  }
  EikonalReport rep;
  for (int k = 0; k < n; ++k) {
    if (skip[static_cast<std::size_t>(k)]) {
      rep.excluded.push_back(k);
      continue;
    }
    const double dv = (-v(k + 2) + 8.0 * v(k + 1) - 8.0 * v(k - 1) + v(k - 2)) / (12.0 * d);
    const double grad = std::sqrt(v(k) * v(k) + dv * dv);
    rep.max_deviation = std::max(rep.max_deviation, std::abs(grad - params.ctilde));
    ++rep.resolved;
  }
  return rep;
}

double cone_lipschitz_excess(const ConeSamples& cone, const SolitonParams& params) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cone.values.size(); ++i) {
    for (std::size_t j = i + 1; j < cone.values.size(); ++j) {
      const double dist = (cone.directions[i] - cone.directions[j]).norm();
      worst = std::max(worst, std::abs(cone.values[i] - cone.values[j]) - params.ctilde * dist);
    }
  }
  return worst;
}

LiftedSolution split_lift(PointFn reduced, int reduced_dim, std::vector<double> a, const SolitonParams& params) {
  if (reduced_dim < 1) throw ArgumentError("reduced dimension must be at least 1");
  double a2 = 0.0;
  for (double v : a) a2 += v * v;
  if (!(a2 < 1.0)) throw ArgumentError("|a| must be < 1");
  LiftedSolution out;
  out.lambda = std::sqrt(1.0 - a2);
  out.c_reduced = out.lambda * params.c;
  if (!(out.c_reduced > 1.0)) throw ArgumentError("reduced constant lambda C must exceed 1");
  out.reduced_dim = reduced_dim;
  out.dim = reduced_dim + static_cast<int>(a.size());
  out.u = [reduced = std::move(reduced), a = std::move(a), lambda = out.lambda, k = reduced_dim,
           dim = out.dim](std::span<const double> x) {
    if (static_cast<int>(x.size()) != dim) throw DimensionError("lifted solution expects a point of dimension " + std::to_string(dim));
    std::vector<double> xr(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) xr[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] / lambda;
    double affine = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) affine += a[i] * x[static_cast<std::size_t>(k) + i];
    return affine + lambda * lambda * reduced(xr);
  };
  return out;
}

}  // namespace soliton
