#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace soliton {

using Vec2 = Eigen::Vector2d;

enum class NodeClass : std::uint8_t { exterior, interior, boundary_cut };

// Stencil arms: axis directions first (+x, -x, +y, -y), then diagonals.
inline constexpr std::array<std::array<int, 2>, 8> kDirections{
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};

/// Point where a stencil arm leaves the domain. `theta` is the fraction of
/// the arm that lies inside, in (0, 1]; Dirichlet data lives here.
struct CutPoint {
  int node = 0;
  int dir = 0;
  double theta = 1.0;
  Vec2 position = Vec2::Zero();
};

// A value slot is an unknown index (>= 0) or a cut point encoded as -1 - cut.
constexpr int cut_slot(int cut) { return -1 - cut; }
constexpr bool is_cut_slot(int slot) { return slot < 0; }
constexpr int cut_of_slot(int slot) { return -1 - slot; }

struct Term {
  int slot;
  double weight;
};

enum class DiffOp : int { dx = 0, dy = 1, dxx = 2, dyy = 3, dxy = 4 };
inline constexpr int kDiffOpCount = 5;

/// Uniform 2D node lattice with a domain mask. Nodes strictly inside the
/// domain are unknowns; arms that leave the domain end at cut points
/// (Shortley-Weller). Every derivative is stored as a linear form over value
/// slots so residuals and Jacobians share one discretization.
class Grid2 {
 public:
  using InsideFn = std::function<bool(const Vec2&)>;
  /// Fraction t in (0, 1] such that from + t (to - from) is on the boundary,
  /// given `from` inside and `to` outside.
  using CrossingFn = std::function<double(const Vec2& from, const Vec2& to)>;

  struct CutSpec {
    int i, j, dir;
    double theta;
  };

  /// Unknowns are nodes for which `inside` holds. Nodes whose nearest cut is
  /// closer than `min_theta` of a cell are treated as lying on the boundary.
  static Grid2 from_domain(Vec2 origin, double h, int nx, int ny, const InsideFn& inside,
                           const CrossingFn& crossing, double min_theta = 1e-6);

  /// Unknowns are masked nodes whose eight neighbours are all masked; the
  /// remaining masked nodes form a rim of cut points with theta = 1.
  static Grid2 from_mask(Vec2 origin, double h, int nx, int ny,
                         const std::vector<std::uint8_t>& mask);

  /// Full rectangle of nx by ny nodes; the outermost ring carries boundary data.
  static Grid2 rectangle(Vec2 origin, double h, int nx, int ny);

  /// Explicit unknown mask and cut list (used when reading fields back).
  static Grid2 from_parts(Vec2 origin, double h, int nx, int ny,
                          const std::vector<std::uint8_t>& unknown_mask,
                          const std::vector<CutSpec>& cuts);

  const Vec2& origin() const { return origin_; }
  double spacing() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  int unknown_count() const { return static_cast<int>(nodes_.size()); }
  int interior_count() const;
  int cut_node_count() const { return unknown_count() - interior_count(); }
  /// Unknown nodes with at least one arm shorter than a full cell.
  int fractional_cut_node_count() const;

  /// Unknown index of node (i, j), or -1 for exterior / out of range.
  int index(int i, int j) const;
  NodeClass cell_class(int i, int j) const;
  NodeClass unknown_class(int k) const { return classes_[static_cast<std::size_t>(k)]; }
  std::array<int, 2> node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }
  Vec2 node_position(int i, int j) const;
  Vec2 position(int k) const;

  const std::vector<CutPoint>& cuts() const { return cuts_; }
  int neighbor_slot(int k, int dir) const { return neighbors_[8 * static_cast<std::size_t>(k) + dir]; }
  double arm_fraction(int k, int dir) const;

  std::span<const Term> stencil(int k, DiffOp op) const;

  /// True when the unknowns form one 4-connected component.
  bool connected() const;

 private:
  Grid2(Vec2 origin, double h, int nx, int ny) : origin_(origin), h_(h), nx_(nx), ny_(ny) {}
  using ThetaFn = std::function<double(int i, int j, int dir)>;
  void build(const std::vector<std::uint8_t>& unknown_mask, const ThetaFn& theta);
  void build_stencils();

  Vec2 origin_;
  double h_;
  int nx_, ny_;
  std::vector<int> index_;  // nx * ny, -1 when not an unknown
  std::vector<std::array<int, 2>> nodes_;
  std::vector<NodeClass> classes_;
  std::vector<int> neighbors_;  // 8 slots per unknown
  std::vector<CutPoint> cuts_;
  std::vector<Term> terms_;
  std::vector<std::uint32_t> offsets_;  // kDiffOpCount * unknowns + 1
};

}  // namespace soliton
