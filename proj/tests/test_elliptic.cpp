#include <doctest.h>

#include <Eigen/SparseCore>

#include <cmath>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "soliton/elliptic.hpp"
#include "soliton/radial.hpp"

using namespace soliton;

namespace {

const SolitonParams kParams = SolitonParams::make(2.0);

std::shared_ptr<const RadialProfile> radial_profile() {
  static const auto p = std::make_shared<const RadialProfile>(solve_radial(kParams, 20.0, 1e-11));
  return p;
}

DirichletProblem zero_disk(double r, double h) {
  return {kParams, ConvexDomain::disk(Vec2::Zero(), r), BoundaryData::constant(0.0), h};
}

double radial_error(const ScalarField& u, double r) {
  const auto p = radial_profile();
  const double top = p->value(r);
  double e = 0.0;
  for (int k = 0; k < u.grid->unknown_count(); ++k) {
    const double exact = p->value(u.grid->position(k).norm()) - top;
    e = std::max(e, std::abs(u.values[static_cast<std::size_t>(k)] - exact));
  }
  return e;
}

}  // namespace

TEST_SUITE("elliptic") {

TEST_CASE("disk node count matches the lattice count") {
  const ScalarField d = discretize(zero_disk(4.0, 0.1));
  const int n = d.grid->unknown_count();
  CHECK(std::abs(n - 5027) <= 50);
  CHECK(std::abs(n - oracle::lattice_points_in_disk(4.0, 0.1)) <= 4);
  for (double v : d.boundary) CHECK(v == 0.0);
}

TEST_CASE("grid-aligned square has only full arms") {
  const DirichletProblem pb{kParams,
                            ConvexDomain::polygon({Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)}),
                            BoundaryData::linear(Vec2(0.3, 0.1), 0.2), 0.1};
  const ScalarField d = discretize(pb);
  CHECK(d.grid->fractional_cut_node_count() == 0);
  CHECK(d.grid->unknown_count() == 19 * 19);
  for (std::size_t c = 0; c < d.boundary.size(); ++c) {
    const Vec2 x = d.grid->cuts()[c].position;
    CHECK(std::abs(std::max(std::abs(x.x()), std::abs(x.y())) - 1.0) < 1e-12);
    CHECK(d.boundary[c] == doctest::Approx(0.3 * x.x() + 0.1 * x.y() + 0.2).epsilon(1e-14));
  }
  CHECK(!pb.domain.smooth_boundary());
}

TEST_CASE("sublevel domains meet every grid line in one segment") {
  const HeightFn fn = [](const Vec2& x) { return 0.5 * x.squaredNorm() + 0.3 * x.x() * x.y() + std::exp(0.2 * x.x()); };
  const DirichletProblem pb{kParams, ConvexDomain::sublevel(fn, 4.0, Vec2::Zero()), BoundaryData::constant(1.0), 0.1};
  const ScalarField d = discretize(pb);
  const Grid2& g = *d.grid;
  for (int j = 0; j < g.ny(); ++j) {
    int runs = 0;
    bool prev = false;
    for (int i = 0; i < g.nx(); ++i) {
      const bool in = g.index(i, j) >= 0;
      if (in && !prev) ++runs;
      prev = in;
    }
    CHECK(runs <= 1);
  }
  CHECK(pb.domain.smooth_boundary());
}

TEST_CASE("too coarse or inadmissible setups are rejected") {
  CHECK_THROWS_AS(discretize(zero_disk(0.4, 0.1)), RefinementError);
  CHECK_THROWS_AS(BoundaryData::linear(Vec2(1.0, 0.0), 0.0), ArgumentError);
  CHECK_THROWS_AS(BoundaryData::table(Vec2::Zero(), {1.0, 2.0}), ArgumentError);
  CHECK_THROWS_AS(ConvexDomain::polygon({Vec2(0, 0), Vec2(2, 0), Vec2(1, 0.2), Vec2(1, 2)}), ArgumentError);
}

TEST_CASE("light-cone hyperplane data is reproduced exactly") {
  const Vec2 v = kParams.ctilde * Vec2(std::cos(0.4), std::sin(0.4));
  const DirichletProblem pb{kParams,
                            ConvexDomain::polygon({Vec2(-2, -2), Vec2(2, -2), Vec2(2, 2), Vec2(-2, 2)}),
                            BoundaryData::linear(v, 0.0), 0.1};
  const auto [u, rep] = solve_dirichlet(pb);
  CHECK(rep.converged);
  CHECK(max_abs(residual_values(u, kParams)) <= 1e-10);
  for (int k = 0; k < u.grid->unknown_count(); ++k) {
    CHECK(std::abs(u.values[static_cast<std::size_t>(k)] - v.dot(u.grid->position(k))) < 1e-9);
  }
  const auto gb = gradient_bound_check(u, kParams, 5.0);
  CHECK(gb.max_grad == doctest::Approx(kParams.ctilde).epsilon(1e-9));
}

TEST_CASE("zero data on a disk converges to the radial solution at second order") {
  const auto [u1, r1] = solve_dirichlet(zero_disk(4.0, 0.1));
  const auto [u2, r2] = solve_dirichlet(zero_disk(4.0, 0.05));
  CHECK(r1.converged);
  CHECK(r2.converged);
  const double e1 = radial_error(u1, 4.0), e2 = radial_error(u2, 4.0);
  CHECK(e1 < 0.01 * 0.1 * 0.1 * 100);
  CHECK(e1 / e2 > 3.0);
  CHECK(e1 / e2 < 5.0);

  // Convergence diagnostics: strict descent and a superlinear tail.
  const auto& hist = r2.residual_history;
  REQUIRE(hist.size() >= 3);
  for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] < hist[i - 1]);
  // Ratios above the rounding floor shrink from step to step.
  std::vector<double> ratios;
  for (std::size_t i = 1; i < hist.size() && hist[i] > 1e-9; ++i) ratios.push_back(hist[i] / hist[i - 1]);
  REQUIRE(ratios.size() >= 3);
  for (std::size_t i = 1; i < ratios.size(); ++i) CHECK(ratios[i] < ratios[i - 1]);
  CHECK(ratios.back() < 1e-2);
  CHECK(hist.back() <= 1e-10);

  // Barriers: u <= 0 and u lies above the plane through the rightmost point.
  const Vec2 rightmost(4.0, 0.0);
  const auto cmp = comparison_check(u2, plane_barrier(ConvexDomain::disk(Vec2::Zero(), 4.0), rightmost, 0.0, kParams),
                                    [](const Vec2&) { return 0.0; });
  CHECK(cmp.lower_violation <= 1e-12);
  CHECK(cmp.upper_violation <= 0.0);
  CHECK(cmp.nodes == u2.grid->unknown_count());
  const auto lower = plane_barrier(ConvexDomain::disk(Vec2::Zero(), 4.0), rightmost, 0.0, kParams);
  CHECK(lower(Vec2(1.0, 3.0)) == doctest::Approx(kParams.ctilde * (1.0 - 4.0)));

  const HeightFn self = FieldInterpolator(u2);
  const auto same = comparison_check(u2, self, self);
  CHECK(same.lower_violation == 0.0);
  CHECK(same.upper_violation == 0.0);

  // Gradient bound and mean convexity.
  const auto gb = gradient_bound_check(u2, kParams, 5.0);
  CHECK(gb.pass);
  CHECK(gb.max_grad <= kParams.ctilde + 5.0 * 0.05);
  const auto b = bundle(u2, kParams);
  for (double w : b.w) CHECK(kParams.c - 1.0 / w >= -5.0 * 0.05);
}

TEST_CASE("gradient bound examples") {
  const auto g = std::make_shared<const Grid2>(Grid2::rectangle(Vec2(-1, -1), 0.1, 21, 21));
  const auto flat = ScalarField::sample(g, [](const Vec2&) { return 3.0; });
  CHECK(gradient_bound_check(flat, kParams).max_grad == 0.0);
  const auto tilt = ScalarField::sample(g, [](const Vec2& x) { return kParams.ctilde * x.y(); });
  CHECK(gradient_bound_check(tilt, kParams).max_grad == doctest::Approx(kParams.ctilde).epsilon(1e-12));
}

TEST_CASE("jacobian matches central differences of the residual") {
  std::mt19937_64 rng(7);
  const ScalarField d = discretize(zero_disk(2.0, 0.1));
  const auto bump = oracle::smooth_random(rng, 0.1, 4);
  const ScalarField u = ScalarField::sample(d.grid, [&](const Vec2& x) { return 0.2 * x.squaredNorm() - 0.8 + bump(x); });
  const Eigen::SparseMatrix<double> jac = jacobian(u, kParams);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd v(u.grid->unknown_count());
    for (auto& x : v) x = nd(rng);
    const Eigen::VectorXd jv = jac * v;
    auto fd = [&](double eps) {
      std::vector<double> plus = u.values, minus = u.values;
      for (std::size_t k = 0; k < plus.size(); ++k) {
        plus[k] += eps * v(static_cast<Eigen::Index>(k));
        minus[k] -= eps * v(static_cast<Eigen::Index>(k));
      }
      const auto rp = residual_values(u.with_values(plus), kParams);
      const auto rm = residual_values(u.with_values(minus), kParams);
      double e = 0.0;
      for (std::size_t k = 0; k < rp.size(); ++k) {
        e = std::max(e, std::abs((rp[k] - rm[k]) / (2.0 * eps) - jv(static_cast<Eigen::Index>(k))));
      }
      return e;
    };
    // Central differences are O(eps^2): the error drops by ~100 per decade.
    const double e4 = fd(1e-4), e5 = fd(1e-5);
    CHECK(e5 < 1e-3 * jv.cwiseAbs().maxCoeff());
    CHECK(e4 / e5 > 50.0);
    CHECK(e4 / e5 < 200.0);
  }
}

TEST_CASE("discrete comparison principle for ordered random data") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> lo(16), hi(16);
    const double phase = 6.283185307179586 * unit(rng);
    for (std::size_t k = 0; k < lo.size(); ++k) {
      const double t = 6.283185307179586 * static_cast<double>(k) / 16.0;
      lo[k] = 0.3 * std::cos(t + phase) + 0.1 * std::sin(2.0 * t);
      hi[k] = lo[k] + 0.05 + 0.2 * unit(rng) * (1.0 + std::cos(t - phase));
    }
    const auto domain = ConvexDomain::disk(Vec2::Zero(), 2.0);
    const auto [ul, rl] = solve_dirichlet({kParams, domain, BoundaryData::table(Vec2::Zero(), lo), 0.1});
    const auto [uh, rh] = solve_dirichlet({kParams, domain, BoundaryData::table(Vec2::Zero(), hi), 0.1});
    REQUIRE(rl.converged);
    REQUIRE(rh.converged);
    for (std::size_t k = 0; k < ul.values.size(); ++k) CHECK(ul.values[k] <= uh.values[k] + 1e-12);
  }
}

TEST_CASE("newton reports non-convergence with its history") {
  NewtonOptions opts;
  opts.max_iterations = 1;
  try {
    solve_dirichlet(zero_disk(3.0, 0.1), opts);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(!e.report().converged);
    CHECK(e.report().iterations >= 1);
    CHECK(!e.report().residual_history.empty());
  }
}

TEST_CASE("default initial guess sits below the solution") {
  const auto pb = zero_disk(3.0, 0.1);
  const ScalarField d = discretize(pb);
  const ScalarField guess = default_initial_guess(pb, d);
  const auto [u, rep] = newton_solve(kParams, guess);
  CHECK(rep.converged);
  CHECK(max_gradient_norm(gradient(guess)) < 1.0);
  for (std::size_t k = 0; k < u.values.size(); ++k) CHECK(guess.values[k] <= u.values[k] + 1e-12);
}

}
