#include "soliton/field.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "soliton/errors.hpp"

namespace soliton {

ScalarField ScalarField::sample(std::shared_ptr<const Grid2> grid, const HeightFn& fn) {
  ScalarField f;
  f.values.resize(static_cast<std::size_t>(grid->unknown_count()));
  for (int k = 0; k < grid->unknown_count(); ++k) f.values[static_cast<std::size_t>(k)] = fn(grid->position(k));
  f.boundary.reserve(grid->cuts().size());
  for (const auto& c : grid->cuts()) f.boundary.push_back(fn(c.position));
  f.grid = std::move(grid);
  return f;
}

ScalarField ScalarField::with_values(std::vector<double> v) const {
  if (v.size() != values.size()) throw DimensionError("value count does not match grid");
  ScalarField f{grid, std::move(v), boundary};
  return f;
}

double ScalarField::apply(int k, DiffOp op) const {
  double acc = 0.0;
  for (const Term& t : grid->stencil(k, op)) acc += t.weight * slot(t.slot);
  return acc;
}

ScalarField restrict_field(const ScalarField& field, const std::function<bool(const Vec2&)>& keep) {
  const Grid2& g = *field.grid;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.nx()) * g.ny(), 0);
  for (int k = 0; k < g.unknown_count(); ++k) {
    const auto [i, j] = g.node(k);
    if (keep(g.position(k))) mask[static_cast<std::size_t>(j) * g.nx() + i] = 1;
  }
  auto sub = std::make_shared<const Grid2>(Grid2::from_mask(g.origin(), g.spacing(), g.nx(), g.ny(), mask));
  ScalarField out;
  out.values.resize(static_cast<std::size_t>(sub->unknown_count()));
  for (int k = 0; k < sub->unknown_count(); ++k) {
    const auto [i, j] = sub->node(k);
    out.values[static_cast<std::size_t>(k)] = field.values[static_cast<std::size_t>(g.index(i, j))];
  }
  for (const auto& c : sub->cuts()) {
    const auto [i, j] = sub->node(c.node);
    const auto& d = kDirections[static_cast<std::size_t>(c.dir)];
    out.boundary.push_back(field.values[static_cast<std::size_t>(g.index(i + d[0], j + d[1]))]);
  }
  out.grid = std::move(sub);
  return out;
}

FieldInterpolator::FieldInterpolator(const ScalarField& field)
    : origin_(field.grid->origin()),
      h_(field.grid->spacing()),
      nx_(field.grid->nx()),
      ny_(field.grid->ny()),
      nodal_(static_cast<std::size_t>(nx_) * ny_, std::numeric_limits<double>::quiet_NaN()) {
  const Grid2& g = *field.grid;
  for (int k = 0; k < g.unknown_count(); ++k) {
    const auto [i, j] = g.node(k);
    nodal_[static_cast<std::size_t>(j) * nx_ + i] = field.values[static_cast<std::size_t>(k)];
  }
  // Full-length arms end exactly on a node.
  for (std::size_t c = 0; c < g.cuts().size(); ++c) {
    const auto& cut = g.cuts()[c];
    if (cut.theta != 1.0) continue;
    const auto [i, j] = g.node(cut.node);
    const auto& d = kDirections[static_cast<std::size_t>(cut.dir)];
    nodal_[static_cast<std::size_t>(j + d[1]) * nx_ + (i + d[0])] = field.boundary[c];
  }
}

double FieldInterpolator::node(int i, int j) const {
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return std::numeric_limits<double>::quiet_NaN();
  return nodal_[static_cast<std::size_t>(j) * nx_ + i];
}

namespace {

std::array<double, 4> catmull_rom_weights(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0, -1.5 * t3 + 2.0 * t2 + 0.5 * t,
          0.5 * t3 - 0.5 * t2};
}

}  // namespace

double FieldInterpolator::at_node(const Vec2& x) const {
  const double fx = (x.x() - origin_.x()) / h_, fy = (x.y() - origin_.y()) / h_;
  const double ri = std::round(fx), rj = std::round(fy);
  if (std::abs(fx - ri) > 1e-9 || std::abs(fy - rj) > 1e-9) return std::numeric_limits<double>::quiet_NaN();
  return node(static_cast<int>(ri), static_cast<int>(rj));
}

bool FieldInterpolator::covers(const Vec2& x) const {
  const double fx = (x.x() - origin_.x()) / h_, fy = (x.y() - origin_.y()) / h_;
  const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
  if (!std::isnan(at_node(x))) return true;
  return !std::isnan(node(i, j)) && !std::isnan(node(i + 1, j)) && !std::isnan(node(i, j + 1)) &&
         !std::isnan(node(i + 1, j + 1));
}

double FieldInterpolator::operator()(const Vec2& x) const {
  if (const double v = at_node(x); !std::isnan(v)) return v;
  const double fx = (x.x() - origin_.x()) / h_, fy = (x.y() - origin_.y()) / h_;
  const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
  const double tx = fx - i, ty = fy - j;

  bool cubic = true;
  for (int b = -1; b <= 2 && cubic; ++b) {
    for (int a = -1; a <= 2 && cubic; ++a) cubic = !std::isnan(node(i + a, j + b));
  }
  if (cubic) {
    const auto wx = catmull_rom_weights(tx), wy = catmull_rom_weights(ty);
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
      double row = 0.0;
      for (int a = 0; a < 4; ++a) row += wx[static_cast<std::size_t>(a)] * node(i + a - 1, j + b - 1);
      acc += wy[static_cast<std::size_t>(b)] * row;
    }
    return acc;
  }
  if (!covers(x)) {
    throw RangeError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                     ") lies outside the sampled field");
  }
  return (1 - tx) * (1 - ty) * node(i, j) + tx * (1 - ty) * node(i + 1, j) +
         (1 - tx) * ty * node(i, j + 1) + tx * ty * node(i + 1, j + 1);
}

}  // namespace soliton
