#include "soliton/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "soliton/errors.hpp"

namespace soliton {

Mat2 inverse_metric(const Vec2& du) {
  const double w2 = 1.0 - du.squaredNorm();
  return Mat2::Identity() + du * du.transpose() / w2;
}

double pointwise_residual(const Vec2& du, const Mat2& hess, double c) {
  const Mat2 a = inverse_metric(du);
  return (a.cwiseProduct(hess)).sum() - (c * lorentz_factor(du) - 1.0);
}

double mean_curvature(const Vec2& du, const Mat2& hess) {
  return inverse_metric(du).cwiseProduct(hess).sum() / lorentz_factor(du);
}

double second_fundamental_norm_sq(const Vec2& du, const Mat2& hess) {
  const Mat2 a = inverse_metric(du);
  const Mat2 m = a * hess;  // a^{ik} u_kj
  return (m * m).trace() / (1.0 - du.squaredNorm());
}

std::vector<Vec2> gradient(const ScalarField& field) {
  const Grid2& g = *field.grid;
  if (g.unknown_count() == 0) throw DimensionError("field has no unknown nodes");
  std::vector<Vec2> du(static_cast<std::size_t>(g.unknown_count()));
  for (int k = 0; k < g.unknown_count(); ++k) {
    du[static_cast<std::size_t>(k)] = Vec2(field.apply(k, DiffOp::dx), field.apply(k, DiffOp::dy));
  }
  return du;
}

std::vector<Mat2> hessian(const ScalarField& field) {
  const Grid2& g = *field.grid;
  if (g.unknown_count() == 0) throw DimensionError("field has no unknown nodes");
  std::vector<Mat2> out(static_cast<std::size_t>(g.unknown_count()));
  for (int k = 0; k < g.unknown_count(); ++k) {
    const double xy = field.apply(k, DiffOp::dxy);
    Mat2 m;
    m << field.apply(k, DiffOp::dxx), xy, xy, field.apply(k, DiffOp::dyy);
    out[static_cast<std::size_t>(k)] = m;
  }
  return out;
}

void require_spacelike(const std::vector<Vec2>& du, double eps_space) {
  const double limit = 1.0 - eps_space;
  for (std::size_t k = 0; k < du.size(); ++k) {
    const double n = du[k].norm();
    if (!(n <= limit)) throw NotSpacelike(k, n);
  }
}

double max_gradient_norm(const std::vector<Vec2>& du) {
  double m = 0.0;
  for (const auto& d : du) m = std::max(m, d.norm());
  return m;
}

GeometryBundle bundle(const ScalarField& field, const SolitonParams& params, double eps_space) {
  (void)params;
  GeometryBundle b;
  b.du = gradient(field);
  require_spacelike(b.du, eps_space);
  b.hess = hessian(field);
  const std::size_t n = b.du.size();
  b.w.resize(n);
  b.aij.resize(n);
  b.mean_h.resize(n);
  b.norm_a_sq.resize(n);
  b.lam_min.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& p = b.du[k];
    const Mat2& hs = b.hess[k];
    b.w[k] = lorentz_factor(p);
    b.aij[k] = inverse_metric(p);
    b.mean_h[k] = b.aij[k].cwiseProduct(hs).sum() / b.w[k];
    b.norm_a_sq[k] = second_fundamental_norm_sq(p, hs);
    b.lam_min[k] = Eigen::SelfAdjointEigenSolver<Mat2>(hs, Eigen::EigenvaluesOnly).eigenvalues()(0);
  }
  return b;
}

ScalarField residual(const ScalarField& field, const SolitonParams& params, double eps_space) {
  const auto du = gradient(field);
  require_spacelike(du, eps_space);
  const auto hs = hessian(field);
  ScalarField r{field.grid, std::vector<double>(du.size()), std::vector<double>(field.boundary.size(), 0.0)};
  for (std::size_t k = 0; k < du.size(); ++k) r.values[k] = pointwise_residual(du[k], hs[k], params.c);
  return r;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

IdentityCheck hessian_identity_check(const ScalarField& field, double eps_space) {
  const Grid2& g = *field.grid;
  const double h = g.spacing();
  const auto du = gradient(field);
  require_spacelike(du, eps_space);
  const auto hs = hessian(field);
  std::vector<double> w(du.size());
  for (std::size_t k = 0; k < du.size(); ++k) w[k] = lorentz_factor(du[k]);

  // Needs central differences of w and of the Hessian at the node, so every
  // neighbour must itself be an interior node.
  auto usable = [&](int k) {
    if (g.unknown_class(k) != NodeClass::interior) return false;
    for (int dir = 0; dir < 8; ++dir) {
      if (g.unknown_class(g.neighbor_slot(k, dir)) != NodeClass::interior) return false;
    }
    return true;
  };

  IdentityCheck out;
  for (int k = 0; k < g.unknown_count(); ++k) {
    if (!usable(k)) continue;
    const auto nb = [&](int dir) { return static_cast<std::size_t>(g.neighbor_slot(k, dir)); };
    const std::size_t kk = static_cast<std::size_t>(k);

    Mat2 w_hess;
    w_hess(0, 0) = (w[nb(0)] - 2.0 * w[kk] + w[nb(1)]) / (h * h);
    w_hess(1, 1) = (w[nb(2)] - 2.0 * w[kk] + w[nb(3)]) / (h * h);
    w_hess(0, 1) = w_hess(1, 0) = (w[nb(4)] - w[nb(5)] - w[nb(6)] + w[nb(7)]) / (4.0 * h * h);

    // third[m](i, j) = u_{m i j}, symmetrized over the two difference orders.
    std::array<Mat2, 2> third;
    const Mat2 d_x = (hs[nb(0)] - hs[nb(1)]) / (2.0 * h);
    const Mat2 d_y = (hs[nb(2)] - hs[nb(3)]) / (2.0 * h);
    for (int m = 0; m < 2; ++m) {
      Mat2 t;
      t(0, 0) = d_x(m, 0);
      t(1, 1) = d_y(m, 1);
      t(0, 1) = t(1, 0) = 0.5 * (d_y(m, 0) + d_x(m, 1));
      third[static_cast<std::size_t>(m)] = t;
    }
    const Vec2& p = du[kk];
    const Mat2& u2 = hs[kk];
    const Mat2 rhs = -(p(0) * third[0] + p(1) * third[1]) / w[kk] -
                     (u2 * inverse_metric(p) * u2) / w[kk];
    const double err = (w_hess - rhs).cwiseAbs().maxCoeff();
    out.max_abs_error = std::max(out.max_abs_error, err);
    out.lhs_scale = std::max(out.lhs_scale, w_hess.cwiseAbs().maxCoeff());
    ++out.nodes;
  }
  if (out.nodes == 0) throw DimensionError("identity check needs a 5x5 block of interior nodes");
  out.max_rel_error = out.lhs_scale > 1e-12 ? out.max_abs_error / out.lhs_scale : out.max_abs_error;
  return out;
}

}  // namespace soliton
