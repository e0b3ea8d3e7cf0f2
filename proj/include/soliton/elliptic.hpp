#pragma once

#include <Eigen/SparseCore>

#include <utility>
#include <vector>

#include "soliton/domain.hpp"
#include "soliton/errors.hpp"
#include "soliton/field.hpp"
#include "soliton/geometry.hpp"
#include "soliton/params.hpp"

namespace soliton {

/// Dirichlet data on the boundary of a convex domain.
class BoundaryData {
 public:
  enum class Kind { constant, linear, table, custom };

  static BoundaryData constant(double value);
  /// g(x) = slope . x + intercept; |slope| must be < 1.
  static BoundaryData linear(const Vec2& slope, double intercept);
  /// Periodic table of values at uniform polar angles about `center`,
  /// linearly interpolated in angle.
  static BoundaryData table(const Vec2& center, std::vector<double> values);
  static BoundaryData custom(HeightFn fn);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  double constant_value() const { return value_; }
  const Vec2& slope() const { return slope_; }
  double intercept() const { return value_; }
  const Vec2& center() const { return center_; }
  const std::vector<double>& table_values() const { return table_; }
  double operator()(const Vec2& x) const;

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  Vec2 slope_ = Vec2::Zero();
  Vec2 center_ = Vec2::Zero();
  std::vector<double> table_;
  HeightFn fn_;
};

/// a^{ij} u_ij - C w + 1 = 0 in the domain, u = g on its boundary.
struct DirichletProblem {
  SolitonParams params;
  ConvexDomain domain;
  BoundaryData boundary;
  double h = 0.1;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  // max norm per accepted iterate
  std::vector<double> step_lengths;
  double spacelike_margin = 0.0;  // ctilde - max|Du|
  bool converged = false;
  long linear_iterations = 0;
  int direct_fallbacks = 0;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, SolveReport report)
      : Error(what), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iterations = 60;
  double eps_space = kSpacelikeEps;
  double min_step = 1e-12;
  /// Cap on the relative tolerance of the inner Krylov solve. The actual
  /// forcing term shrinks with the residual so the tail stays quadratic.
  double forcing = 1e-2;
  double ilu_droptol = 1e-6;
  int ilu_fill = 20;
  int max_linear_iterations = 1000;
};

/// Node classification, cut fractions and sampled boundary data. Throws
/// RefinementError if fewer than 100 unknowns fit or they are disconnected.
ScalarField discretize(const DirichletProblem& problem);

/// Constant data: the envelope g + ctilde * max_b (x - b).nu(b) of the plane
/// barriers through the boundary points b. Otherwise the discrete harmonic
/// extension of the data (ArgumentError if that is not spacelike).
ScalarField default_initial_guess(const DirichletProblem& problem, const ScalarField& discretized);

std::vector<double> residual_values(const ScalarField& u, const SolitonParams& params);

/// Exact derivative of the discrete residual with respect to the unknowns:
///   a^{ij} D_ij + (d a^{ij}/d u_k u_ij + C u_k / w) D_k.
Eigen::SparseMatrix<double> jacobian(const ScalarField& u, const SolitonParams& params);

/// Damped inexact Newton: BiCGSTAB with ILUT preconditioning for the
/// linearised step and backtracking on 0.5 |F|^2, rejecting any trial with
/// max|Du| > 1 - eps_space. Throws NonConvergence on stagnation.
std::pair<ScalarField, SolveReport> newton_solve(const SolitonParams& params, ScalarField initial,
                                                 const NewtonOptions& options = {});

/// discretize + default_initial_guess + newton_solve.
std::pair<ScalarField, SolveReport> solve_dirichlet(const DirichletProblem& problem,
                                                    const NewtonOptions& options = {});

struct ComparisonReport {
  double lower_violation = 0.0;  // max(lower - u)
  double upper_violation = 0.0;  // max(u - upper)
  int nodes = 0;
};

ComparisonReport comparison_check(const ScalarField& u, const HeightFn& lower, const HeightFn& upper);

/// Plane g + ctilde (x - b).nu(b) through boundary point b: an exact solution
/// lying below any solution with constant data g.
HeightFn plane_barrier(const ConvexDomain& domain, const Vec2& boundary_point, double g,
                       const SolitonParams& params);

struct GradientBoundReport {
  double max_grad = 0.0;
  double bound = 0.0;
  double kappa = 0.0;
  double margin = 0.0;  // bound - max_grad
  bool pass = false;
};

/// max|Du| <= ctilde + kappa h.
GradientBoundReport gradient_bound_check(const ScalarField& u, const SolitonParams& params,
                                         double kappa = 5.0);

}  // namespace soliton
