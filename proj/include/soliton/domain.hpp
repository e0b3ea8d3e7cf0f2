#pragma once

#include <cstdint>
#include <vector>

#include "soliton/field.hpp"

namespace soliton {

struct BoundingBox {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();
};

/// Convex planar domain described by a level function that is negative
/// strictly inside.
class ConvexDomain {
 public:
  enum class Kind { disk, polygon, sublevel };

  static ConvexDomain disk(const Vec2& center, double radius);
  /// Vertices in convex position, either orientation.
  static ConvexDomain polygon(std::vector<Vec2> vertices);
  /// {x : fn(x) < level}. `seed` must lie inside; the bounding box is found
  /// by ray casting from it and `fn` is spot-checked for convexity on random
  /// segments (ArgumentError on failure).
  static ConvexDomain sublevel(HeightFn fn, double level, const Vec2& seed,
                               std::uint64_t check_seed = 42);

  Kind kind() const { return kind_; }
  double level(const Vec2& x) const;
  bool contains(const Vec2& x) const { return level(x) < 0.0; }
  /// t in (0, 1] with from + t (to - from) on the boundary; `from` inside.
  double crossing(const Vec2& from, const Vec2& to) const;
  Vec2 outward_normal(const Vec2& boundary_point) const;
  const BoundingBox& bounding_box() const { return box_; }
  /// Polygons have corners, so they are not C^{2,alpha}; existence theory
  /// for the Dirichlet problem does not literally cover them.
  bool smooth_boundary() const { return kind_ != Kind::polygon; }

  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  double sublevel_value() const { return level_value_; }

 private:
  Kind kind_ = Kind::disk;
  Vec2 center_ = Vec2::Zero();
  double radius_ = 0.0;
  std::vector<Vec2> vertices_;
  std::vector<Vec2> normals_;
  std::vector<double> offsets_;
  HeightFn fn_;
  double level_value_ = 0.0;
  BoundingBox box_;
};

}  // namespace soliton
