#include "soliton/params.hpp"

#include <cmath>
#include <string>

#include "soliton/errors.hpp"

namespace soliton {

NotSpacelike::NotSpacelike(std::size_t node, double grad_norm)
    : Error("field is not strictly spacelike at node " + std::to_string(node) +
            " (|Du| = " + std::to_string(grad_norm) + ")"),
      node_(node),
      grad_norm_(grad_norm) {}

ConstructionFailure::ConstructionFailure(double level, const std::string& what)
    : Error("construction failed at level " + std::to_string(level) + ": " + what),
      level_(level) {}

SolitonParams SolitonParams::make(double c, int dim) {
  if (!(c > 1.0) || !std::isfinite(c)) {
    throw ArgumentError("forcing constant C must be finite and > 1, got " + std::to_string(c));
  }
  if (dim < 1) {
    throw ArgumentError("dimension must be >= 1, got " + std::to_string(dim));
  }
  SolitonParams p;
  p.c = c;
  p.dim = dim;
  p.ctilde = std::sqrt(1.0 - 1.0 / (c * c));
  return p;
}

double SolitonParams::reduced_constant(double a_norm) const {
  if (!(a_norm >= 0.0) || !(a_norm < 1.0)) {
    throw ArgumentError("affine slope must satisfy 0 <= |a| < 1");
  }
  return std::sqrt(1.0 - a_norm * a_norm) * c;
}

}  // namespace soliton
