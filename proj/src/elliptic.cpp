#include "soliton/elliptic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

namespace soliton {

BoundaryData BoundaryData::constant(double value) {
  BoundaryData b;
  b.kind_ = Kind::constant;
  b.value_ = value;
  return b;
}

BoundaryData BoundaryData::linear(const Vec2& slope, double intercept) {
  if (!(slope.norm() < 1.0)) throw ArgumentError("linear boundary data must have slope below 1");
  BoundaryData b;
  b.kind_ = Kind::linear;
  b.slope_ = slope;
  b.value_ = intercept;
  return b;
}

BoundaryData BoundaryData::table(const Vec2& center, std::vector<double> values) {
  if (values.size() < 3) throw ArgumentError("boundary table needs at least three values");
  BoundaryData b;
  b.kind_ = Kind::table;
  b.center_ = center;
  b.table_ = std::move(values);
  return b;
}

BoundaryData BoundaryData::custom(HeightFn fn) {
  BoundaryData b;
  b.kind_ = Kind::custom;
  b.fn_ = std::move(fn);
  return b;
}

double BoundaryData::operator()(const Vec2& x) const {
  switch (kind_) {
    case Kind::constant:
      return value_;
    case Kind::linear:
      return slope_.dot(x) + value_;
    case Kind::table: {
      const Vec2 d = x - center_;
      double a = std::atan2(d.y(), d.x());
      if (a < 0.0) a += 2.0 * std::numbers::pi;
      const double n = static_cast<double>(table_.size());
      const double pos = a / (2.0 * std::numbers::pi) * n;
      const auto i = static_cast<std::size_t>(std::floor(pos)) % table_.size();
      const double t = pos - std::floor(pos);
      return (1.0 - t) * table_[i] + t * table_[(i + 1) % table_.size()];
    }
    case Kind::custom:
      return fn_(x);
  }
  return 0.0;
}

ScalarField discretize(const DirichletProblem& problem) {
  const double h = problem.h;
  if (!(h > 0.0)) throw ArgumentError("grid spacing must be positive");
  const auto& box = problem.domain.bounding_box();
  const double i0 = std::floor(box.lo.x() / h) - 2.0, j0 = std::floor(box.lo.y() / h) - 2.0;
  const double i1 = std::ceil(box.hi.x() / h) + 2.0, j1 = std::ceil(box.hi.y() / h) + 2.0;
  const int nx = static_cast<int>(i1 - i0) + 1, ny = static_cast<int>(j1 - j0) + 1;
  const Vec2 origin(i0 * h, j0 * h);
  const auto& dom = problem.domain;
  auto grid = std::make_shared<const Grid2>(Grid2::from_domain(
      origin, h, nx, ny, [&](const Vec2& x) { return dom.contains(x); },
      [&](const Vec2& a, const Vec2& b) { return dom.crossing(a, b); }));
  if (grid->unknown_count() < 100) {
    throw RefinementError("domain holds only " + std::to_string(grid->unknown_count()) +
                          " nodes at h = " + std::to_string(h) + "; refine the grid");
  }
  if (!grid->connected()) throw RefinementError("domain interior is disconnected at this spacing");

  ScalarField f;
  f.grid = grid;
  f.values.assign(static_cast<std::size_t>(grid->unknown_count()), 0.0);
  f.boundary.reserve(grid->cuts().size());
  for (const auto& c : grid->cuts()) f.boundary.push_back(problem.boundary(c.position));

  if (problem.boundary.kind() == BoundaryData::Kind::table) {
    // Lipschitz estimate along the boundary samples ordered by angle.
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t c = 0; c < grid->cuts().size(); ++c) {
      const Vec2 d = grid->cuts()[c].position - problem.boundary.center();
      order.emplace_back(std::atan2(d.y(), d.x()), c);
    }
    std::sort(order.begin(), order.end());
    double lip = 0.0;
    for (std::size_t s = 0; s < order.size(); ++s) {
      const std::size_t a = order[s].second, b = order[(s + 1) % order.size()].second;
      const double dist = (grid->cuts()[a].position - grid->cuts()[b].position).norm();
      if (dist > 0.25 * h) lip = std::max(lip, std::abs(f.boundary[a] - f.boundary[b]) / dist);
    }
    if (!(lip < 1.0)) throw ArgumentError("boundary table is not Lipschitz with constant < 1");
  }
  return f;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

std::vector<double> solve_sparse(const SpMat& a, const Eigen::VectorXd& rhs, double rel_tol,
                                 const NewtonOptions& opt, SolveReport* report) {
  Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> solver;
  solver.preconditioner().setDroptol(opt.ilu_droptol);
  solver.preconditioner().setFillfactor(opt.ilu_fill);
  solver.setTolerance(rel_tol);
  solver.setMaxIterations(opt.max_linear_iterations);
  solver.compute(a);
  Eigen::VectorXd x;
  bool ok = solver.info() == Eigen::Success;
  if (ok) {
    x = solver.solve(rhs);
    ok = solver.info() == Eigen::Success && x.allFinite();
    if (report) report->linear_iterations += solver.iterations();
  }
  if (!ok) {
    Eigen::SparseLU<SpMat> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error("sparse factorisation of the linearised operator failed");
    x = lu.solve(rhs);
    if (report) ++report->direct_fallbacks;
  }
  return {x.data(), x.data() + x.size()};
}

}  // namespace

ScalarField default_initial_guess(const DirichletProblem& problem, const ScalarField& disc) {
  const Grid2& g = *disc.grid;
  ScalarField guess = disc;
  if (problem.boundary.is_constant()) {
    const double gval = problem.boundary.constant_value();
    std::vector<Vec2> points, normals;
    for (const auto& c : g.cuts()) {
      points.push_back(c.position);
      normals.push_back(problem.domain.outward_normal(c.position));
    }
    for (int k = 0; k < g.unknown_count(); ++k) {
      const Vec2 x = g.position(k);
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < points.size(); ++c) best = std::max(best, (x - points[c]).dot(normals[c]));
      guess.values[static_cast<std::size_t>(k)] = gval + problem.params.ctilde * std::min(best, 0.0);
    }
    return guess;
  }
  // Discrete harmonic extension.
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.unknown_count());
  for (int k = 0; k < g.unknown_count(); ++k) {
    for (DiffOp op : {DiffOp::dxx, DiffOp::dyy}) {
      for (const Term& t : g.stencil(k, op)) {
        if (is_cut_slot(t.slot)) {
          rhs(k) -= t.weight * disc.slot(t.slot);
        } else {
          trips.emplace_back(k, t.slot, t.weight);
        }
      }
    }
  }
  SpMat lap(g.unknown_count(), g.unknown_count());
  lap.setFromTriplets(trips.begin(), trips.end());
  NewtonOptions opt;
  guess.values = solve_sparse(lap, rhs, 1e-12, opt, nullptr);
  if (max_gradient_norm(gradient(guess)) >= 1.0 - kSpacelikeEps) {
    throw ArgumentError("harmonic extension of the boundary data is not spacelike; supply an initial guess");
  }
  return guess;
}

std::vector<double> residual_values(const ScalarField& u, const SolitonParams& params) {
  return residual(u, params).values;
}

SpMat jacobian(const ScalarField& u, const SolitonParams& params) {
  const Grid2& g = *u.grid;
  const auto du = gradient(u);
  require_spacelike(du);
  const auto hs = hessian(u);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(g.unknown_count()) * 14);
  for (int k = 0; k < g.unknown_count(); ++k) {
    const Vec2& p = du[static_cast<std::size_t>(k)];
    const Mat2& hm = hs[static_cast<std::size_t>(k)];
    const double w2 = 1.0 - p.squaredNorm();
    const double w = std::sqrt(w2);
    const Mat2 a = Mat2::Identity() + p * p.transpose() / w2;
    // d/dp_m of a^{ij} u_ij - C w.
    const Vec2 b = 2.0 * (hm * p) / w2 + 2.0 * p.dot(hm * p) * p / (w2 * w2) + params.c * p / w;
    const std::array<std::pair<DiffOp, double>, 5> coef{
        {{DiffOp::dxx, a(0, 0)}, {DiffOp::dyy, a(1, 1)}, {DiffOp::dxy, 2.0 * a(0, 1)},
         {DiffOp::dx, b(0)}, {DiffOp::dy, b(1)}}};
    for (const auto& [op, cf] : coef) {
      for (const Term& t : g.stencil(k, op)) {
        if (!is_cut_slot(t.slot)) trips.emplace_back(k, t.slot, cf * t.weight);
      }
    }
  }
  SpMat jac(g.unknown_count(), g.unknown_count());
  jac.setFromTriplets(trips.begin(), trips.end());
  return jac;
}

std::pair<ScalarField, SolveReport> newton_solve(const SolitonParams& params, ScalarField u,
                                                 const NewtonOptions& opt) {
  SolveReport report;
  auto norm_inf = [](const std::vector<double>& v) { return max_abs(v); };
  auto merit = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return 0.5 * s;
  };

  std::vector<double> f = residual(u, params, opt.eps_space).values;
  report.residual_history.push_back(norm_inf(f));

  const std::size_t n = u.values.size();
  while (true) {
    if (report.residual_history.back() <= opt.tol) {
      report.converged = true;
      break;
    }
    if (report.iterations >= opt.max_iterations) {
      throw NonConvergence("Newton iteration limit reached", report);
    }
    const SpMat jac = jacobian(u, params);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) rhs(static_cast<Eigen::Index>(k)) = -f[k];
    const double forcing = std::clamp(report.residual_history.back(), 1e-12, opt.forcing);
    const std::vector<double> step = solve_sparse(jac, rhs, forcing, opt, &report);

    const double m0 = merit(f);
    double alpha = 1.0;
    while (true) {
      if (alpha < opt.min_step) throw NonConvergence("line search stagnated", report);
      std::vector<double> trial = u.values;
      for (std::size_t k = 0; k < n; ++k) trial[k] += alpha * step[k];
      ScalarField cand = u.with_values(std::move(trial));
      const auto du = gradient(cand);
      if (max_gradient_norm(du) > 1.0 - opt.eps_space) {
        alpha *= 0.5;
        continue;
      }
      std::vector<double> fc = residual(cand, params, opt.eps_space).values;
      if (merit(fc) <= (1.0 - 1e-4 * alpha) * m0) {
        u = std::move(cand);
        f = std::move(fc);
        break;
      }
      alpha *= 0.5;
    }
    ++report.iterations;
    report.step_lengths.push_back(alpha);
    report.residual_history.push_back(norm_inf(f));
  }
  report.spacelike_margin = params.ctilde - max_gradient_norm(gradient(u));
  return {std::move(u), std::move(report)};
}

std::pair<ScalarField, SolveReport> solve_dirichlet(const DirichletProblem& problem,
                                                    const NewtonOptions& options) {
  const ScalarField disc = discretize(problem);
  return newton_solve(problem.params, default_initial_guess(problem, disc), options);
}

ComparisonReport comparison_check(const ScalarField& u, const HeightFn& lower, const HeightFn& upper) {
  ComparisonReport r;
  r.lower_violation = -std::numeric_limits<double>::infinity();
  r.upper_violation = -std::numeric_limits<double>::infinity();
  const Grid2& g = *u.grid;
  for (int k = 0; k < g.unknown_count(); ++k) {
    const Vec2 x = g.position(k);
    const double v = u.values[static_cast<std::size_t>(k)];
    r.lower_violation = std::max(r.lower_violation, lower(x) - v);
    r.upper_violation = std::max(r.upper_violation, v - upper(x));
    ++r.nodes;
  }
  return r;
}

HeightFn plane_barrier(const ConvexDomain& domain, const Vec2& b, double g, const SolitonParams& params) {
  const Vec2 nu = domain.outward_normal(b);
  const double slope = params.ctilde;
  return [=](const Vec2& x) { return g + slope * (x - b).dot(nu); };
}

GradientBoundReport gradient_bound_check(const ScalarField& u, const SolitonParams& params, double kappa) {
  GradientBoundReport r;
  r.max_grad = max_gradient_norm(gradient(u));
  r.kappa = kappa;
  r.bound = params.ctilde + kappa * u.grid->spacing();
  r.margin = r.bound - r.max_grad;
  r.pass = r.max_grad <= r.bound;
  return r;
}

}  // namespace soliton
