#include "soliton/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "soliton/errors.hpp"

namespace soliton {

namespace {

void check_shape(double h, int nx, int ny) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ArgumentError("grid spacing must be positive");
  if (nx < 3 || ny < 3) throw DimensionError("grid needs at least 3x3 nodes");
}

// Sorts by slot and merges duplicates; exact zeros are dropped.
void compact(std::vector<Term>& form) {
  std::sort(form.begin(), form.end(), [](const Term& a, const Term& b) { return a.slot < b.slot; });
  std::vector<Term> out;
  out.reserve(form.size());
  for (const Term& t : form) {
    if (!out.empty() && out.back().slot == t.slot) {
      out.back().weight += t.weight;
    } else {
      out.push_back(t);
    }
  }
  std::erase_if(out, [](const Term& t) { return t.weight == 0.0; });
  form = std::move(out);
}

}  // namespace

Grid2 Grid2::from_domain(Vec2 origin, double h, int nx, int ny, const InsideFn& inside,
                         const CrossingFn& crossing, double min_theta) {
  check_shape(h, nx, ny);
  Grid2 g(origin, h, nx, ny);
  const auto n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  std::vector<std::uint8_t> in(n, 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      in[static_cast<std::size_t>(j) * nx + i] = inside(g.node_position(i, j)) ? 1 : 0;
    }
  }
  // Nodes lying (numerically) on the boundary become boundary points.
  std::vector<std::uint8_t> unknown = in;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t id = static_cast<std::size_t>(j) * nx + i;
      if (!in[id]) continue;
      if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) {
        throw RefinementError("domain touches the edge of the node array");
      }
      const Vec2 p = g.node_position(i, j);
      for (const auto& d : kDirections) {
        const std::size_t nb = static_cast<std::size_t>(j + d[1]) * nx + (i + d[0]);
        if (in[nb]) continue;
        if (crossing(p, g.node_position(i + d[0], j + d[1])) < min_theta) {
          unknown[id] = 0;
          break;
        }
      }
    }
  }
  g.build(unknown, [&](int i, int j, int dir) {
    const auto& d = kDirections[static_cast<std::size_t>(dir)];
    const std::size_t nb = static_cast<std::size_t>(j + d[1]) * nx + (i + d[0]);
    if (in[nb]) return 1.0;  // neighbour was demoted onto the boundary
    const double t = crossing(g.node_position(i, j), g.node_position(i + d[0], j + d[1]));
    if (t > 1.0 - 1e-9) return 1.0;  // boundary passes through the neighbour
    return std::clamp(t, min_theta, 1.0);
  });
  return g;
}

Grid2 Grid2::from_mask(Vec2 origin, double h, int nx, int ny, const std::vector<std::uint8_t>& mask) {
  check_shape(h, nx, ny);
  if (mask.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
    throw DimensionError("mask size does not match grid shape");
  }
  Grid2 g(origin, h, nx, ny);
  std::vector<std::uint8_t> unknown(mask.size(), 0);
  for (int j = 1; j < ny - 1; ++j) {
    for (int i = 1; i < nx - 1; ++i) {
      if (!mask[static_cast<std::size_t>(j) * nx + i]) continue;
      bool all = true;
      for (const auto& d : kDirections) {
        all = all && mask[static_cast<std::size_t>(j + d[1]) * nx + (i + d[0])];
      }
      unknown[static_cast<std::size_t>(j) * nx + i] = all ? 1 : 0;
    }
  }
  g.build(unknown, [](int, int, int) { return 1.0; });
  return g;
}

Grid2 Grid2::rectangle(Vec2 origin, double h, int nx, int ny) {
  return from_mask(origin, h, nx, ny,
                   std::vector<std::uint8_t>(static_cast<std::size_t>(nx) * ny, 1));
}

Grid2 Grid2::from_parts(Vec2 origin, double h, int nx, int ny,
                        const std::vector<std::uint8_t>& unknown_mask,
                        const std::vector<CutSpec>& cuts) {
  check_shape(h, nx, ny);
  if (unknown_mask.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
    throw DimensionError("mask size does not match grid shape");
  }
  std::vector<double> thetas(unknown_mask.size() * 8, 1.0);
  for (const auto& c : cuts) {
    if (c.i < 0 || c.j < 0 || c.i >= nx || c.j >= ny || c.dir < 0 || c.dir >= 8) {
      throw ArgumentError("cut specification out of range");
    }
    if (!(c.theta > 0.0 && c.theta <= 1.0)) throw ArgumentError("cut fraction must lie in (0, 1]");
    thetas[(static_cast<std::size_t>(c.j) * nx + c.i) * 8 + c.dir] = c.theta;
  }
  Grid2 g(origin, h, nx, ny);
  g.build(unknown_mask, [&](int i, int j, int dir) {
    return thetas[(static_cast<std::size_t>(j) * nx + i) * 8 + dir];
  });
  return g;
}

void Grid2::build(const std::vector<std::uint8_t>& unknown_mask, const ThetaFn& theta) {
  index_.assign(unknown_mask.size(), -1);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const std::size_t id = static_cast<std::size_t>(j) * nx_ + i;
      if (!unknown_mask[id]) continue;
      index_[id] = static_cast<int>(nodes_.size());
      nodes_.push_back({i, j});
    }
  }
  neighbors_.assign(nodes_.size() * 8, 0);
  classes_.assign(nodes_.size(), NodeClass::interior);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto [i, j] = nodes_[k];
    for (int dir = 0; dir < 8; ++dir) {
      const auto& d = kDirections[static_cast<std::size_t>(dir)];
      const int nb = index(i + d[0], j + d[1]);
      if (nb >= 0) {
        neighbors_[8 * k + dir] = nb;
        continue;
      }
      const double t = theta(i, j, dir);
      if (!(t > 0.0 && t <= 1.0)) {
        throw ArgumentError("cut fraction outside (0, 1] at node " + std::to_string(k));
      }
      CutPoint c;
      c.node = static_cast<int>(k);
      c.dir = dir;
      c.theta = t;
      c.position = node_position(i, j) + t * h_ * Vec2(d[0], d[1]);
      neighbors_[8 * k + dir] = cut_slot(static_cast<int>(cuts_.size()));
      cuts_.push_back(c);
      classes_[k] = NodeClass::boundary_cut;
    }
  }
  build_stencils();
}

void Grid2::build_stencils() {
  const std::size_t n = nodes_.size();
  offsets_.assign(kDiffOpCount * n + 1, 0);
  terms_.clear();
  terms_.reserve(n * 20);
  std::array<std::vector<Term>, kDiffOpCount> ops;
  for (std::size_t kk = 0; kk < n; ++kk) {
    const int k = static_cast<int>(kk);
    for (auto& op : ops) op.clear();
    auto& dx = ops[0];
    auto& dy = ops[1];
    auto& dxx = ops[2];
    auto& dyy = ops[3];
    auto& dxy = ops[4];

    // Three-point nonuniform first and second differences per axis.
    auto axis = [&](int plus, int minus, std::vector<Term>& first, std::vector<Term>& second) {
      const double hp = arm_fraction(k, plus) * h_;
      const double hm = arm_fraction(k, minus) * h_;
      const int sp = neighbor_slot(k, plus);
      const int sm = neighbor_slot(k, minus);
      first = {{sp, hm / (hp * (hp + hm))}, {sm, -hp / (hm * (hp + hm))}, {k, (hp - hm) / (hp * hm)}};
      second = {{sp, 2.0 / (hp * (hp + hm))}, {sm, 2.0 / (hm * (hp + hm))}, {k, -2.0 / (hp * hm)}};
    };
    axis(0, 1, dx, dxx);
    axis(2, 3, dy, dyy);

    // Mixed derivative from the diagonal arms: each arm of length rho gives
    // u_d - u0 - rho (sx ux + sy uy) - rho^2 (uxx + uyy) / 2 = sx sy rho^2 uxy,
    // combined in least squares. Reduces to the four-point central formula
    // when all arms are full.
    double rho_sq = 0.0;
    for (int dir = 4; dir < 8; ++dir) {
      const double rho = arm_fraction(k, dir) * h_;
      rho_sq += rho * rho;
    }
    for (int dir = 4; dir < 8; ++dir) {
      const auto& d = kDirections[static_cast<std::size_t>(dir)];
      const double sx = d[0], sy = d[1];
      const double rho = arm_fraction(k, dir) * h_;
      const double c = sx * sy / rho_sq;
      dxy.push_back({neighbor_slot(k, dir), c});
      dxy.push_back({k, -c});
      for (const Term& t : dx) dxy.push_back({t.slot, -c * rho * sx * t.weight});
      for (const Term& t : dy) dxy.push_back({t.slot, -c * rho * sy * t.weight});
      for (const Term& t : dxx) dxy.push_back({t.slot, -c * 0.5 * rho * rho * t.weight});
      for (const Term& t : dyy) dxy.push_back({t.slot, -c * 0.5 * rho * rho * t.weight});
    }
    for (int op = 0; op < kDiffOpCount; ++op) {
      compact(ops[static_cast<std::size_t>(op)]);
      terms_.insert(terms_.end(), ops[static_cast<std::size_t>(op)].begin(),
                    ops[static_cast<std::size_t>(op)].end());
      offsets_[kDiffOpCount * kk + op + 1] = static_cast<std::uint32_t>(terms_.size());
    }
  }
}

int Grid2::interior_count() const {
  return static_cast<int>(std::count(classes_.begin(), classes_.end(), NodeClass::interior));
}

int Grid2::fractional_cut_node_count() const {
  std::vector<std::uint8_t> flagged(nodes_.size(), 0);
  for (const auto& c : cuts_) {
    if (c.theta < 1.0) flagged[static_cast<std::size_t>(c.node)] = 1;
  }
  return static_cast<int>(std::count(flagged.begin(), flagged.end(), 1));
}

int Grid2::index(int i, int j) const {
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  return index_[static_cast<std::size_t>(j) * nx_ + i];
}

NodeClass Grid2::cell_class(int i, int j) const {
  const int k = index(i, j);
  return k < 0 ? NodeClass::exterior : classes_[static_cast<std::size_t>(k)];
}

Vec2 Grid2::node_position(int i, int j) const {
  return Vec2(origin_.x() + i * h_, origin_.y() + j * h_);
}

Vec2 Grid2::position(int k) const {
  const auto [i, j] = node(k);
  return node_position(i, j);
}

double Grid2::arm_fraction(int k, int dir) const {
  const int s = neighbor_slot(k, dir);
  return is_cut_slot(s) ? cuts_[static_cast<std::size_t>(cut_of_slot(s))].theta : 1.0;
}

std::span<const Term> Grid2::stencil(int k, DiffOp op) const {
  const std::size_t at = kDiffOpCount * static_cast<std::size_t>(k) + static_cast<std::size_t>(op);
  return {terms_.data() + offsets_[at], terms_.data() + offsets_[at + 1]};
}

bool Grid2::connected() const {
  if (nodes_.empty()) return false;
  std::vector<std::uint8_t> seen(nodes_.size(), 0);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = 1;
  std::size_t visited = 1;
  while (!todo.empty()) {
    const int k = todo.front();
    todo.pop();
    for (int dir = 0; dir < 4; ++dir) {
      const int s = neighbor_slot(k, dir);
      if (is_cut_slot(s) || seen[static_cast<std::size_t>(s)]) continue;
      seen[static_cast<std::size_t>(s)] = 1;
      ++visited;
      todo.push(s);
    }
  }
  return visited == nodes_.size();
}

}  // namespace soliton
