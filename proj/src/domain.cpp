#include "soliton/domain.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "soliton/errors.hpp"

namespace soliton {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

ConvexDomain ConvexDomain::disk(const Vec2& center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError("disk radius must be positive");
  ConvexDomain d;
  d.kind_ = Kind::disk;
  d.center_ = center;
  d.radius_ = radius;
  d.box_ = {center - Vec2::Constant(radius), center + Vec2::Constant(radius)};
  return d;
}

ConvexDomain ConvexDomain::polygon(std::vector<Vec2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) throw ArgumentError("polygon needs at least three vertices");
  double area = 0.0;
  for (std::size_t i = 0; i < n; ++i) area += cross(vertices[i], vertices[(i + 1) % n]);
  if (area == 0.0) throw ArgumentError("degenerate polygon");
  if (area < 0.0) std::reverse(vertices.begin(), vertices.end());
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = vertices[(i + 1) % n] - vertices[i];
    const Vec2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    if (!(cross(e0, e1) > 0.0)) throw ArgumentError("polygon vertices are not in strictly convex position");
  }
  ConvexDomain d;
  d.kind_ = Kind::polygon;
  d.vertices_ = std::move(vertices);
  d.box_ = {d.vertices_[0], d.vertices_[0]};
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = d.vertices_[(i + 1) % n] - d.vertices_[i];
    const Vec2 nrm = Vec2(e.y(), -e.x()).normalized();
    d.normals_.push_back(nrm);
    d.offsets_.push_back(nrm.dot(d.vertices_[i]));
    d.box_.lo = d.box_.lo.cwiseMin(d.vertices_[i]);
    d.box_.hi = d.box_.hi.cwiseMax(d.vertices_[i]);
  }
  return d;
}

ConvexDomain ConvexDomain::sublevel(HeightFn fn, double level, const Vec2& seed, std::uint64_t check_seed) {
  if (!(fn(seed) < level)) throw ArgumentError("sublevel seed point is not inside the domain");
  ConvexDomain d;
  d.kind_ = Kind::sublevel;
  d.fn_ = std::move(fn);
  d.level_value_ = level;
  d.center_ = seed;

  constexpr int kRays = 256;
  Vec2 lo = seed, hi = seed;
  double reach = 0.0;
  for (int k = 0; k < kRays; ++k) {
    const double a = 2.0 * std::numbers::pi * k / kRays;
    const Vec2 dir(std::cos(a), std::sin(a));
    double t_in = 0.0, t_out = 1.0;
    while (d.fn_(seed + t_out * dir) < level) {
      t_in = t_out;
      t_out *= 2.0;
      if (t_out > 1e8) throw ArgumentError("sublevel set appears unbounded");
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (t_in + t_out);
      (d.fn_(seed + mid * dir) < level ? t_in : t_out) = mid;
    }
    const Vec2 b = seed + t_out * dir;
    lo = lo.cwiseMin(b);
    hi = hi.cwiseMax(b);
    reach = std::max(reach, t_out);
  }
  // Extremes may fall between rays.
  const double pad = 0.05 * reach + 1e-9;
  d.box_ = {lo - Vec2::Constant(pad), hi + Vec2::Constant(pad)};

  std::mt19937_64 rng(check_seed);
  std::uniform_real_distribution<double> ux(d.box_.lo.x(), d.box_.hi.x());
  std::uniform_real_distribution<double> uy(d.box_.lo.y(), d.box_.hi.y());
  for (int s = 0; s < 200; ++s) {
    const Vec2 a(ux(rng), uy(rng)), b(ux(rng), uy(rng));
    const double fa = d.fn_(a), fb = d.fn_(b), fm = d.fn_(0.5 * (a + b));
    if (fm > 0.5 * (fa + fb) + 1e-9 * (1.0 + std::abs(fa) + std::abs(fb))) {
      throw ArgumentError("sublevel function failed the convexity spot check");
    }
  }
  return d;
}

double ConvexDomain::level(const Vec2& x) const {
  switch (kind_) {
    case Kind::disk:
      return (x - center_).norm() - radius_;
    case Kind::polygon: {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < normals_.size(); ++i) m = std::max(m, normals_[i].dot(x) - offsets_[i]);
      return m;
    }
    case Kind::sublevel:
      return fn_(x) - level_value_;
  }
  return 0.0;
}

double ConvexDomain::crossing(const Vec2& from, const Vec2& to) const {
  const Vec2 d = to - from;
  if (kind_ == Kind::disk) {
    // |from - c + t d|^2 = R^2, larger root.
    const Vec2 f = from - center_;
    const double a = d.squaredNorm(), b = f.dot(d), c = f.squaredNorm() - radius_ * radius_;
    const double t = (-b + std::sqrt(std::max(0.0, b * b - a * c))) / a;
    return std::clamp(t, 0.0, 1.0);
  }
  const double g0 = level(from), g1 = level(to);
  if (g1 <= 0.0) return 1.0;
  if (g0 >= 0.0) return 0.0;
  auto g = [&](double t) { return level(from + t * d); };
  boost::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      g, 0.0, 1.0, g0, g1, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (a + b);
}

Vec2 ConvexDomain::outward_normal(const Vec2& b) const {
  switch (kind_) {
    case Kind::disk:
      return (b - center_).normalized();
    case Kind::polygon: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < normals_.size(); ++i) {
        if (normals_[i].dot(b) - offsets_[i] > normals_[best].dot(b) - offsets_[best]) best = i;
      }
      return normals_[best];
    }
    case Kind::sublevel: {
      const double e = 1e-6 * (1.0 + b.norm());
      const Vec2 g((fn_(b + Vec2(e, 0)) - fn_(b - Vec2(e, 0))) / (2 * e),
                   (fn_(b + Vec2(0, e)) - fn_(b - Vec2(0, e))) / (2 * e));
      return g.normalized();
    }
  }
  return Vec2::UnitX();
}

}  // namespace soliton
