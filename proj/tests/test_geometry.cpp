#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "soliton/errors.hpp"
#include "soliton/geometry.hpp"
#include "soliton/grid.hpp"
#include "soliton/params.hpp"

using namespace soliton;

namespace {

std::shared_ptr<const Grid2> square_grid(double half, double h) {
  const int n = static_cast<int>(std::lround(2.0 * half / h)) + 1;
  return std::make_shared<const Grid2>(Grid2::rectangle(Vec2(-half, -half), h, n, n));
}

int node_at(const Grid2& g, const Vec2& x) {
  const int i = static_cast<int>(std::lround((x.x() - g.origin().x()) / g.spacing()));
  const int j = static_cast<int>(std::lround((x.y() - g.origin().y()) / g.spacing()));
  return g.index(i, j);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("params validate and derive ctilde") {
  const auto p = SolitonParams::make(2.0, 2);
  CHECK(p.ctilde == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-15));
  for (double c : {1.0001, 1.5, 2.0, 7.0, 1e3}) {
    const auto q = SolitonParams::make(c, 3);
    CHECK(std::abs(q.ctilde * q.ctilde + 1.0 / (c * c) - 1.0) < 1e-15);
  }
  CHECK_THROWS_AS(SolitonParams::make(1.0, 2), ArgumentError);
  CHECK_THROWS_AS(SolitonParams::make(0.5, 2), ArgumentError);
  CHECK_THROWS_AS(SolitonParams::make(2.0, 0), ArgumentError);
  CHECK(p.reduced_constant(0.6) == doctest::Approx(1.6));
}

TEST_CASE("rectangle grid has only full arms") {
  const Grid2 g = Grid2::rectangle(Vec2(0, 0), 0.5, 7, 5);
  CHECK(g.unknown_count() == 5 * 3);
  CHECK(g.fractional_cut_node_count() == 0);
  for (const auto& c : g.cuts()) CHECK(c.theta == 1.0);
  CHECK_THROWS_AS(Grid2::rectangle(Vec2(0, 0), 0.5, 2, 5), DimensionError);
  CHECK_THROWS_AS(Grid2::rectangle(Vec2(0, 0), -1.0, 5, 5), ArgumentError);
}

TEST_CASE("disk grid: neighbours and cut fractions") {
  const double r = 1.7;
  auto inside = [r](const Vec2& x) { return x.norm() < r; };
  auto cross = [r](const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double qa = d.squaredNorm(), qb = a.dot(d), qc = a.squaredNorm() - r * r;
    return (-qb + std::sqrt(qb * qb - qa * qc)) / qa;
  };
  const Grid2 g = Grid2::from_domain(Vec2(-2, -2), 0.1, 41, 41, inside, cross);
  CHECK(g.connected());
  CHECK(g.fractional_cut_node_count() > 0);
  for (int k = 0; k < g.unknown_count(); ++k) {
    for (int dir = 0; dir < 8; ++dir) {
      const double t = g.arm_fraction(k, dir);
      CHECK(t > 0.0);
      CHECK(t <= 1.0);
    }
    if (g.unknown_class(k) == NodeClass::interior) {
      for (int dir = 0; dir < 4; ++dir) {
        const int s = g.neighbor_slot(k, dir);
        REQUIRE(!is_cut_slot(s));
        CHECK(g.unknown_class(s) != NodeClass::exterior);
      }
    }
  }
  for (const auto& c : g.cuts()) CHECK(c.position.norm() == doctest::Approx(r).epsilon(1e-9));
}

TEST_CASE("gradient examples") {
  auto g = square_grid(1.5, 0.1);
  const auto affine = ScalarField::sample(g, [](const Vec2& x) { return 3.0 * x.x() - 2.0 * x.y(); });
  for (const auto& d : gradient(affine)) {
    CHECK(d.x() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(d.y() == doctest::Approx(-2.0).epsilon(1e-12));
  }
  const auto constant = ScalarField::sample(g, [](const Vec2&) { return 7.0; });
  for (const auto& d : gradient(constant)) CHECK(d.norm() == 0.0);
  const auto square = ScalarField::sample(g, [](const Vec2& x) { return x.x() * x.x(); });
  const int k = node_at(*g, Vec2(1.0, 0.0));
  REQUIRE(k >= 0);
  CHECK(gradient(square)[static_cast<std::size_t>(k)].x() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("bundle on a light-cone hyperplane and on u = 0") {
  const auto p = SolitonParams::make(2.0);
  auto g = square_grid(2.0, 0.1);
  const auto plane = ScalarField::sample(g, [&](const Vec2& x) { return p.ctilde * x.x(); });
  const auto b = bundle(plane, p);
  for (std::size_t k = 0; k < b.w.size(); ++k) {
    CHECK(b.w[k] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b.hess[k].cwiseAbs().maxCoeff() < 1e-11);
    CHECK(b.norm_a_sq[k] < 1e-20);
  }
  const auto zero = ScalarField::sample(g, [](const Vec2&) { return 0.0; });
  const auto z = bundle(zero, p);
  for (std::size_t k = 0; k < z.w.size(); ++k) {
    CHECK(z.w[k] == 1.0);
    CHECK((z.aij[k] - Mat2::Identity()).norm() == 0.0);
    CHECK(z.mean_h[k] == 0.0);
  }
}

TEST_CASE("paraboloid at (1, 0) matches the hand-evaluated formulas") {
  const auto p = SolitonParams::make(2.0);
  auto g = square_grid(1.2, 0.1);
  const auto u = ScalarField::sample(g, [](const Vec2& x) { return x.squaredNorm() / 4.0; });
  const int k = node_at(*g, Vec2(1.0, 0.0));
  REQUIRE(k >= 0);
  const auto kk = static_cast<std::size_t>(k);
  const auto b = bundle(u, p);
  CHECK(b.du[kk].x() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(b.du[kk].y()) < 1e-12);
  CHECK(b.w[kk] == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
  CHECK(b.aij[kk](0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(b.aij[kk](1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  const double aij_uij = (b.aij[kk].array() * b.hess[kk].array()).sum();
  CHECK(aij_uij == doctest::Approx(7.0 / 6.0).epsilon(1e-12));
  const double expected = oracle::residual_formula(0.5, 0.0, 0.5, 0.0, 0.5, 2.0);
  CHECK(expected == doctest::Approx(7.0 / 6.0 - (std::sqrt(3.0) - 1.0)).epsilon(1e-14));
  CHECK(residual(u, p).values[kk] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.43462).epsilon(1e-5));
}

TEST_CASE("residual examples") {
  const auto p = SolitonParams::make(2.0);
  auto g = square_grid(2.0, 0.1);
  const auto plane = ScalarField::sample(g, [&](const Vec2& x) { return p.ctilde * x.x() + 0.3; });
  CHECK(max_abs(residual(plane, p).values) < 1e-12);
  const auto zero = ScalarField::sample(g, [](const Vec2&) { return 0.0; });
  for (double v : residual(zero, p).values) CHECK(v == -1.0);
}

TEST_CASE("timelike fields are rejected with the node") {
  auto g = square_grid(1.0, 0.1);
  const auto steep = ScalarField::sample(g, [](const Vec2& x) { return 1.2 * x.x(); });
  CHECK_THROWS_AS(bundle(steep, SolitonParams::make(2.0)), NotSpacelike);
  try {
    require_spacelike(gradient(steep));
  } catch (const NotSpacelike& e) {
    CHECK(e.grad_norm() == doctest::Approx(1.2));
    CHECK(e.node() == 0);
  }
}

TEST_CASE("pointwise invariants on random spacelike data") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 2000; ++s) {
    Vec2 du(u(rng), u(rng));
    if (du.norm() >= 0.99) du *= 0.9 / du.norm();
    Mat2 h1, h2;
    h1 << u(rng), u(rng), 0, u(rng);
    h1(1, 0) = h1(0, 1);
    h2 << u(rng), u(rng), 0, u(rng);
    h2(1, 0) = h2(0, 1);
    const double w = lorentz_factor(du);
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
    Eigen::SelfAdjointEigenSolver<Mat2> es(inverse_metric(du));
    CHECK(es.eigenvalues()(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) == doctest::Approx(1.0 / (w * w)).epsilon(1e-10));
    const double hm = mean_curvature(du, h1);
    CHECK(second_fundamental_norm_sq(du, h1) >= hm * hm / 2.0 - 1e-12);
    // Linear in the Hessian for fixed gradient.
    const double c = 2.0;
    const double lin = pointwise_residual(du, h1 + 0.7 * h2, c) - pointwise_residual(du, h1, c) -
                       0.7 * (pointwise_residual(du, h2, c) - pointwise_residual(du, Mat2::Zero(), c));
    CHECK(std::abs(lin) < 1e-10);
    CHECK(pointwise_residual(du, h1, c) ==
          doctest::Approx(oracle::residual_formula(du.x(), du.y(), h1(0, 0), h1(0, 1), h1(1, 1), c)).epsilon(1e-12));
  }
}

TEST_CASE("hessian identity: affine fields give zero") {
  auto g = square_grid(1.0, 0.1);
  const auto f = ScalarField::sample(g, [](const Vec2& x) { return 0.3 * x.x() - 0.4 * x.y() + 1.0; });
  const auto r = hessian_identity_check(f);
  CHECK(r.nodes > 0);
  CHECK(r.max_abs_error < 1e-10);
}

TEST_CASE("hessian identity converges at second order") {
  auto field = [](double h) {
    return ScalarField::sample(square_grid(1.0, h), [](const Vec2& x) { return 0.3 * std::sin(x.x()) * std::cos(x.y()); });
  };
  const double e1 = hessian_identity_check(field(0.04)).max_abs_error;
  const double e2 = hessian_identity_check(field(0.02)).max_abs_error;
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
  const auto saddle = ScalarField::sample(square_grid(1.0, 0.01), [](const Vec2& x) { return 0.2 * (x.x() * x.x() - x.y() * x.y()); });
  CHECK(hessian_identity_check(saddle).max_abs_error < 1e-3);
}

TEST_CASE("hessian identity needs room") {
  const auto f = ScalarField::sample(square_grid(0.2, 0.1), [](const Vec2& x) { return 0.1 * x.x(); });
  CHECK_THROWS_AS(hessian_identity_check(f), DimensionError);
}

}
