#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "soliton/grid.hpp"

namespace soliton {

using HeightFn = std::function<double(const Vec2&)>;

/// Height function sampled on a Grid2: one value per unknown node plus the
/// Dirichlet values at every cut point.
struct ScalarField {
  std::shared_ptr<const Grid2> grid;
  std::vector<double> values;
  std::vector<double> boundary;

  static ScalarField sample(std::shared_ptr<const Grid2> grid, const HeightFn& fn);
  /// Same grid and boundary values with new unknown values.
  ScalarField with_values(std::vector<double> v) const;

  double slot(int s) const {
    return is_cut_slot(s) ? boundary[static_cast<std::size_t>(cut_of_slot(s))]
                          : values[static_cast<std::size_t>(s)];
  }
  double apply(int k, DiffOp op) const;
  std::size_t size() const { return values.size(); }
};

/// Keeps the unknown nodes selected by `keep` (evaluated at node positions);
/// the outermost kept nodes become theta = 1 boundary points carrying the
/// original nodal values, so derivatives at the remaining unknowns match.
ScalarField restrict_field(const ScalarField& field, const std::function<bool(const Vec2&)>& keep);

/// Off-grid evaluation: Catmull-Rom bicubic where a 4x4 block of valued
/// nodes exists, bilinear where only the enclosing cell does, and the nodal
/// value at any valued node.
class FieldInterpolator {
 public:
  explicit FieldInterpolator(const ScalarField& field);
  double operator()(const Vec2& x) const;
  bool covers(const Vec2& x) const;

 private:
  double node(int i, int j) const;
  /// Value when x sits on a valued node, NaN otherwise.
  double at_node(const Vec2& x) const;
  Vec2 origin_;
  double h_;
  int nx_, ny_;
  std::vector<double> nodal_;  // NaN where no value is known
};

}  // namespace soliton
