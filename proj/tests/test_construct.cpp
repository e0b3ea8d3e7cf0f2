#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <vector>

#include "soliton/construct.hpp"
#include "soliton/errors.hpp"
#include "soliton/geometry.hpp"
#include "soliton/radial.hpp"

using namespace soliton;

namespace {

const SolitonParams kParams = SolitonParams::make(2.0);
constexpr double kPi = 3.14159265358979323846;

const SphereFunction& cos3() {
  static const SphereFunction f = SphereFunction::cosine(0.3, 3, kParams);
  return f;
}

const Envelopes& cos3_envelopes() {
  static const Envelopes e(cos3(), envelope_profile(cos3(), 100.0));
  return e;
}

}  // namespace

TEST_SUITE("construct") {

TEST_CASE("constant data has flat supporting planes") {
  const auto f = SphereFunction::constant(1.5, kParams);
  CHECK(f.m_bound() == 0.0);
  CHECK(f.required_bound() == doctest::Approx(0.0).epsilon(1e-12));
  for (double t : {0.0, 1.0, 4.0}) {
    const auto p = supporting_planes(f, t);
    CHECK(p.p1.norm() < 1e-12);
    CHECK(p.p2.norm() < 1e-12);
    CHECK(f.value(t) == doctest::Approx(1.5));
  }
}

TEST_CASE("cosine data: interpolation, bound and planes") {
  const auto& f = cos3();
  CHECK(f.value(0.1234) == doctest::Approx(0.3 * std::cos(3.0 * 0.1234)).epsilon(1e-9));
  CHECK(f.dtheta(2.5) == doctest::Approx(-0.9 * std::sin(7.5)).epsilon(1e-7));
  CHECK(f.m_bound() >= f.required_bound());
  CHECK(f.bound_violation(10000) <= 0.0);
  CHECK(supporting_plane_violation(f, 10000) <= 1e-12);
  for (double t : {0.0, 0.7, 3.0, 5.5}) {
    const auto p = supporting_planes(f, t);
    const Vec2 y = kParams.ctilde * Vec2(std::cos(t), std::sin(t));
    CHECK((p.p1 - p.p2 - 4.0 * f.m_bound() * y).norm() < 1e-14);
    // Df is tangent to the circle.
    CHECK(std::abs(f.gradient(t).dot(y)) < 1e-12);
  }
}

TEST_CASE("a curvature bound that is too small is rejected") {
  std::vector<double> v(360);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 0.3 * std::cos(3.0 * 2.0 * kPi * static_cast<double>(k) / 360.0);
  CHECK_THROWS_AS(SphereFunction::from_samples(v, kParams, 0.1), BadCurvatureBound);
  CHECK_THROWS_AS(SphereFunction::from_samples(v, kParams, -1.0), BadCurvatureBound);
  const auto ok = SphereFunction::from_samples(v, kParams, 5.0);
  CHECK(ok.m_bound() == 5.0);
  CHECK_THROWS_AS(SphereFunction::from_samples(v, SolitonParams::make(2.0, 3)), DimensionError);
}

TEST_CASE("sphere data from csv") {
  const auto dir = std::filesystem::temp_directory_path() / "soliton_tests";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "f.csv").string();
  {
    std::ofstream out(path);
    out.precision(17);
    out << "theta,f\n";
    for (int k = 0; k < 64; ++k) {
      const double t = 2.0 * kPi * k / 64.0;
      out << t << ',' << 0.2 * std::sin(t) << '\n';
    }
  }
  const auto f = SphereFunction::from_csv(path, kParams);
  CHECK(f.size() == 64);
  CHECK(f.value(1.0) == doctest::Approx(0.2 * std::sin(1.0)).epsilon(1e-5));
  {
    std::ofstream out(path);
    out << "theta,f\n0,1\n0.5,1\n0.6,1\n0.7,1\n0.8,1\n0.9,1\n1.0,1\n1.1,1\n";
  }
  CHECK_THROWS_AS(SphereFunction::from_csv(path, kParams), ArgumentError);
}

TEST_CASE("envelopes of zero data are the normalised radial solution") {
  const auto f = SphereFunction::constant(0.0, kParams);
  const auto prof = envelope_profile(f, 60.0);
  const Envelopes e(f, prof, 90);
  const double c = e.profile_constant();
  // psi - c_psi follows ctilde r - (1/4) log r at large r.
  CHECK(std::abs(prof->value(50.0) - c - (kParams.ctilde * 50.0 - 0.25 * std::log(50.0))) < 0.01);
  for (const Vec2& x : {Vec2(0, 0), Vec2(3, -4), Vec2(-20, 11)}) {
    CHECK(e.q1(x) == doctest::Approx(prof->value(x.norm()) - c).epsilon(1e-12));
    CHECK(e.q2(x) == doctest::Approx(prof->value(x.norm()) - c).epsilon(1e-12));
  }
}

TEST_CASE("cosine envelopes: ordered, q1 convex, correct asymptotics") {
  const auto& e = cos3_envelopes();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (int t = 0; t < 200; ++t) {
    const Vec2 x(u(rng), u(rng)), y(u(rng), u(rng));
    CHECK(e.q1(x) <= e.q2(x) + 1e-12);
    CHECK(e.q1(0.5 * (x + y)) <= 0.5 * (e.q1(x) + e.q1(y)) + 1e-12);
  }
  double prev1 = 1e300, prev2 = 1e300;
  for (double r : {20.0, 40.0, 80.0}) {
    const double d1 = angular_profile(e.q1_fn(), cos3(), r).sup_deviation;
    const double d2 = angular_profile(e.q2_fn(), cos3(), r).sup_deviation;
    CHECK(d1 < prev1);
    CHECK(d2 < prev2);
    prev1 = d1;
    prev2 = d2;
  }
  CHECK(prev1 < 0.05);
  CHECK_THROWS_AS(e.q1(Vec2(1e4, 0.0)), RangeError);
}

TEST_CASE("exhaustion with zero data reproduces the radial solution") {
  const auto f = SphereFunction::constant(0.0, kParams);
  ExhaustionOptions opts;
  opts.n_angles = 90;
  const double h = 0.25;
  const auto res = exhaustion_construct(f, kParams, {8.0, 16.0}, 4.0, h, opts);
  REQUIRE(res.solutions.size() == 2);
  REQUIRE(res.cauchy_gaps.size() == 1);
  for (const auto& rep : res.reports) {
    CHECK(rep.solve.converged);
    CHECK(rep.lower_gap >= -1e-2);
    CHECK(rep.upper_gap >= -1e-2);
  }
  const auto& prof = res.envelopes->profile();
  const double c = res.envelopes->profile_constant();
  double err = 0.0;
  for (int k = 0; k < res.final.grid->unknown_count(); ++k) {
    const double exact = prof.value(res.final.grid->position(k).norm()) - c;
    err = std::max(err, std::abs(res.final.values[static_cast<std::size_t>(k)] - exact));
    CHECK(res.final.grid->position(k).norm() <= 4.0 + 1e-12);
  }
  CHECK(err <= 0.5 * h * h);
  CHECK(res.cauchy_gaps[0] <= 0.5 * h * h);
}

TEST_CASE("small cosine exhaustion is sandwiched and not radial") {
  ExhaustionOptions opts;
  opts.n_angles = 180;
  const auto f = SphereFunction::cosine(0.3, 3, kParams, 360);
  const auto res = exhaustion_construct(f, kParams, {10.0, 20.0, 40.0}, 5.0, 0.5, opts);
  REQUIRE(res.cauchy_gaps.size() == 2);
  CHECK(res.cauchy_gaps[1] < res.cauchy_gaps[0]);
  CHECK(res.gaps_nonincreasing);
  for (const auto& rep : res.reports) {
    CHECK(rep.lower_gap >= -1e-2 * 1.5);
    CHECK(rep.upper_gap >= -1e-2 * 1.5);
  }
  const HeightFn u = FieldInterpolator(res.final);
  CHECK(angular_std(u, 4.0) > 0.01);
  CHECK_THROWS_AS(exhaustion_construct(f, kParams, {20.0, 10.0}, 5.0, 0.5, opts), ArgumentError);
  CHECK_THROWS_AS(exhaustion_construct(f, kParams, {1.0}, 5.0, 0.5, opts), ArgumentError);
}

TEST_CASE("blow-down of planes and the radial solution") {
  const Vec2 v = kParams.ctilde * Vec2(0.6, -0.8);
  const auto dirs = uniform_directions(360);
  const auto plane = blowdown([&](const Vec2& x) { return v.dot(x) + 2.0; }, dirs, {1.0, 10.0, 100.0});
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    CHECK(plane.values[k] == doctest::Approx(v.dot(dirs[k])).epsilon(1e-12));
    for (double r : plane.rescaled[k]) CHECK(r == doctest::Approx(v.dot(dirs[k])).epsilon(1e-12));
  }
  // Fourth-order angular differences: error ~ (2 pi / 360)^4.
  CHECK(eikonal_check(plane, kParams).max_deviation < 1e-7);
  CHECK(cone_lipschitz_excess(plane, kParams) <= 1e-12);

  const auto prof = std::make_shared<const RadialProfile>(solve_radial(kParams, 1000.0));
  const auto radial = blowdown(translated_radial(prof, Vec2::Zero(), 0.0), dirs, {50.0, 100.0, 200.0, 400.0, 800.0});
  CHECK(radial.min_increment >= 0.0);
  for (double val : radial.values) CHECK(val == doctest::Approx(kParams.ctilde).epsilon(1e-3));
  const auto rep = eikonal_check(radial, kParams);
  CHECK(rep.excluded.empty());
  CHECK(rep.max_deviation < 1e-3);
}

TEST_CASE("blow-down detects non-convex input") {
  const auto dirs = uniform_directions(16);
  CHECK_THROWS_AS(blowdown([](const Vec2& x) { return -x.squaredNorm(); }, dirs, {1.0, 2.0}), NotConvex);
  CHECK_THROWS_AS(blowdown([](const Vec2& x) { return x.x(); }, dirs, {2.0, 1.0}), ArgumentError);
}

TEST_CASE("eikonal check excludes kinks") {
  const double ct = kParams.ctilde;
  const auto dirs = uniform_directions(360);
  const auto cone = blowdown([ct](const Vec2& x) { return ct * std::abs(x.x()); }, dirs, {1.0, 2.0, 4.0});
  const auto rep = eikonal_check(cone, kParams);
  CHECK(!rep.excluded.empty());
  CHECK(rep.excluded.size() <= 20);
  CHECK(rep.max_deviation < 1e-7);
  CHECK(rep.resolved + static_cast<int>(rep.excluded.size()) == 360);

  // A cone steeper than ctilde fails both checks.
  const auto steep = blowdown([](const Vec2& x) { return 0.95 * x.norm(); }, dirs, {1.0, 2.0});
  CHECK(eikonal_check(steep, kParams).max_deviation > 0.05);
  const auto wobble = blowdown([ct](const Vec2& x) { return ct * x.norm() + 0.9 * x.x(); }, dirs, {1.0, 2.0});
  CHECK(cone_lipschitz_excess(wobble, kParams) > 0.0);

  auto bad = cone;
  std::swap(bad.directions[3], bad.directions[4]);
  CHECK_THROWS_AS(eikonal_check(bad, kParams), ArgumentError);
}

TEST_CASE("split lift") {
  // a = 0: the identity.
  const PointFn g = [](std::span<const double> x) { return 0.1 * x[0] * x[0] - 0.2 * x[1]; };
  const auto id = split_lift(g, 2, {}, kParams);
  CHECK(id.lambda == 1.0);
  CHECK(id.c_reduced == kParams.c);
  const std::array<double, 2> p{0.7, -1.3};
  CHECK(id.u(p) == g(p));

  // a = 0.6 lifts the one-dimensional soliton with constant 1.6.
  const auto lifted = split_lift(
      [prof = std::make_shared<const RadialProfile>(solve_radial(SolitonParams::make(1.6, 1), 20.0))](
          std::span<const double> x) { return prof->value(std::abs(x[0])); },
      1, {0.6}, kParams);
  CHECK(lifted.lambda == doctest::Approx(0.8));
  CHECK(lifted.c_reduced == doctest::Approx(1.6));
  CHECK(lifted.dim == 2);
  auto err = [&](double h) {
    const int n = static_cast<int>(std::lround(6.0 / h)) + 1;
    const auto grid = std::make_shared<const Grid2>(Grid2::rectangle(Vec2(-3, -3), h, n, n));
    const auto u = ScalarField::sample(grid, [&](const Vec2& x) {
      const std::array<double, 2> q{x.x(), x.y()};
      return lifted.u(q);
    });
    double uyy = 0.0;
    for (const auto& m : hessian(u)) uyy = std::max(uyy, std::abs(m(1, 1)));
    CHECK(uyy < 1e-9);
    return max_abs(residual(u, kParams).values);
  };
  const double e1 = err(0.1), e2 = err(0.05);
  CHECK(e1 <= 0.5 * 0.1 * 0.1);
  CHECK(e2 <= 0.5 * 0.05 * 0.05);
  CHECK(e1 / e2 > 3.0);

  CHECK_THROWS_AS(split_lift(g, 1, {0.9}, kParams), ArgumentError);
  CHECK_THROWS_AS(split_lift(g, 1, {0.6, 0.8}, kParams), ArgumentError);
  const std::array<double, 3> wrong{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(lifted.u(wrong), DimensionError);
}

}
