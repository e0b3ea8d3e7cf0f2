#pragma once

namespace soliton {

/// Constants of the translating soliton equation
///   a^{ij} u_ij = C w - 1,  w = sqrt(1 - |Du|^2).
///
/// `ctilde` is the light-cone slope sqrt(1 - 1/C^2): the hyperplanes
/// u = v.x + b with |v| = ctilde solve the equation, and every entire
/// solution is asymptotic to a cone of that slope.
struct SolitonParams {
  double c = 2.0;
  int dim = 2;
  double ctilde = 0.0;

  /// Validating constructor; throws ArgumentError unless c > 1 and dim >= 1.
  static SolitonParams make(double c, int dim = 2);

  /// Constant of the reduced problem after splitting off an affine factor
  /// with slope |a|: lambda * C with lambda = sqrt(1 - |a|^2).
  double reduced_constant(double a_norm) const;
};

}  // namespace soliton
