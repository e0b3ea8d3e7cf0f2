#pragma once

#include <Eigen/Core>

#include <cmath>
#include <vector>

#include "soliton/field.hpp"
#include "soliton/params.hpp"

namespace soliton {

using Mat2 = Eigen::Matrix2d;

/// Largest admissible |Du| is 1 - kSpacelikeEps.
inline constexpr double kSpacelikeEps = 1e-8;

/// Pointwise geometry of a spacelike graph, one entry per unknown node.
struct GeometryBundle {
  std::vector<Vec2> du;
  std::vector<double> w;
  std::vector<Mat2> aij;
  std::vector<Mat2> hess;
  std::vector<double> mean_h;
  std::vector<double> norm_a_sq;
  std::vector<double> lam_min;
};

// Pointwise formulas. `du` must satisfy |du| < 1.
inline double lorentz_factor(const Vec2& du) { return std::sqrt(1.0 - du.squaredNorm()); }
/// a^{ij} = delta_ij + u_i u_j / w^2 (inverse induced metric).
Mat2 inverse_metric(const Vec2& du);
/// a^{ij} u_ij - (C w - 1).
double pointwise_residual(const Vec2& du, const Mat2& hess, double c);
/// H = a^{ij} u_ij / w.
double mean_curvature(const Vec2& du, const Mat2& hess);
/// |A|^2 = a^{ik} a^{jl} u_ij u_kl / w^2.
double second_fundamental_norm_sq(const Vec2& du, const Mat2& hess);

std::vector<Vec2> gradient(const ScalarField& field);
std::vector<Mat2> hessian(const ScalarField& field);

/// Throws NotSpacelike at the first node with |Du| > 1 - eps_space.
void require_spacelike(const std::vector<Vec2>& du, double eps_space = kSpacelikeEps);
double max_gradient_norm(const std::vector<Vec2>& du);

GeometryBundle bundle(const ScalarField& field, const SolitonParams& params,
                      double eps_space = kSpacelikeEps);

/// Soliton residual a^{ij} u_ij - (C w - 1) at every unknown node; the
/// returned field has zero boundary values.
ScalarField residual(const ScalarField& field, const SolitonParams& params,
                     double eps_space = kSpacelikeEps);

double max_abs(const std::vector<double>& v);

struct IdentityCheck {
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  double lhs_scale = 0.0;
  int nodes = 0;
};

/// Compares the finite-difference Hessian of w with
///   -u_k u_kij / w - a^{kl} u_ki u_lj / w
/// at interior nodes whose neighbours are interior too. Valid for any
/// spacelike graph; the discrepancy is O(h^2).
IdentityCheck hessian_identity_check(const ScalarField& field, double eps_space = kSpacelikeEps);

}  // namespace soliton
