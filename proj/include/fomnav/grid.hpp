#pragma once

// Grid lattice primitives shared by mapping, objects and planning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fomnav/common.hpp"
#include "fomnav/geometry.hpp"

namespace fomnav {

/// Inclusive rectangle of cells. Empty when r1 < r0.
struct CellBox {
  int r0 = 0, c0 = 0, r1 = -1, c1 = -1;

  bool empty() const { return r1 < r0 || c1 < c0; }
  bool contains(const Cell& c) const {
    return c.row >= r0 && c.row <= r1 && c.col >= c0 && c.col <= c1;
  }
  void expand(const Cell& c) {
    if (empty()) {
      *this = {c.row, c.col, c.row, c.col};
      return;
    }
    r0 = std::min(r0, c.row);
    c0 = std::min(c0, c.col);
    r1 = std::max(r1, c.row);
    c1 = std::max(c1, c.col);
  }
  void expand(const CellBox& b) {
    if (b.empty()) return;
    expand(Cell{b.r0, b.c0});
    expand(Cell{b.r1, b.c1});
  }
  CellBox dilated(int n) const { return empty() ? *this : CellBox{r0 - n, c0 - n, r1 + n, c1 + n}; }
};

/// Placement of a cell lattice in the world plane.
struct GridShape {
  geometry::Vec2 origin = geometry::Vec2::Zero();  // world (x, y) of the corner of cell (0,0)
  double resolution = 0.05;
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  bool in_bounds(const Cell& c) const { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; }
  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.row) * cols + c.col;
  }
  Cell cell_at(std::size_t idx) const {
    return {static_cast<int>(idx / cols), static_cast<int>(idx % cols)};
  }
  Cell cell_of(const geometry::Vec2& xy) const {
    return {static_cast<int>(std::floor((xy.y() - origin.y()) / resolution)),
            static_cast<int>(std::floor((xy.x() - origin.x()) / resolution))};
  }
  geometry::Vec2 center_of(const Cell& c) const {
    return {origin.x() + (c.col + 0.5) * resolution, origin.y() + (c.row + 0.5) * resolution};
  }
  CellBox full() const { return {0, 0, rows - 1, cols - 1}; }
  CellBox clip(const CellBox& b) const {
    if (b.empty()) return b;
    return {std::max(b.r0, 0), std::max(b.c0, 0), std::min(b.r1, rows - 1), std::min(b.c1, cols - 1)};
  }
  bool same_lattice(const GridShape& o) const {
    return rows == o.rows && cols == o.cols && resolution == o.resolution && origin == o.origin;
  }
};

inline constexpr int kNeighbors8[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                          {0, 1},   {1, -1}, {1, 0},  {1, 1}};

/// Cell offsets within a closed disc of `radius` meters (by cell-center distance).
std::vector<Cell> disc_offsets(double radius, double resolution);

/// Marks every cell within `radius` of a set cell; restricted to `box` when non-empty.
std::vector<std::uint8_t> inflate_mask(const GridShape& shape, std::span<const std::uint8_t> mask,
                                       double radius, const CellBox& box = {});

enum class CellState : std::uint8_t { FreeExplored, Obstacle, Unknown };

/// 2D obstacle and exploration map with an inflated (non-navigable) layer.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(const GridShape& shape, double inflation_radius);

  const GridShape& shape() const { return shape_; }
  int rows() const { return shape_.rows; }
  int cols() const { return shape_.cols; }
  double resolution() const { return shape_.resolution; }
  double inflation_radius() const { return inflation_radius_; }

  bool in_bounds(const Cell& c) const { return shape_.in_bounds(c); }
  CellState state(const Cell& c) const;
  bool is_obstacle(const Cell& c) const { return obstacle_[shape_.index(c)] != 0; }
  bool is_explored(const Cell& c) const { return explored_[shape_.index(c)] != 0; }
  bool is_inflated(const Cell& c) const { return inflated_[shape_.index(c)] != 0; }
  bool is_unknown(const Cell& c) const { return state(c) == CellState::Unknown; }

  /// Returns true if the cell was not an obstacle before.
  bool set_obstacle(const Cell& c);
  /// Returns true if the cell was not explored before.
  bool set_explored(const Cell& c);

  std::span<const std::uint8_t> obstacle_mask() const { return obstacle_; }
  std::span<const std::uint8_t> explored_mask() const { return explored_; }
  std::span<const std::uint8_t> inflated_mask() const { return inflated_; }

  /// Bounding box of all explored or obstacle cells.
  const CellBox& known_box() const { return known_; }
  std::size_t explored_free_count() const;

 private:
  GridShape shape_;
  double inflation_radius_ = 0;
  std::vector<Cell> disc_;
  std::vector<std::uint8_t> obstacle_, explored_, inflated_;
  CellBox known_;
};

/// Blocked cells discovered at runtime. Marks are never removed.
class CollisionMap {
 public:
  CollisionMap() = default;
  explicit CollisionMap(const GridShape& shape) : shape_(shape), blocked_(shape.size(), 0) {}

  const GridShape& shape() const { return shape_; }
  bool blocked(const Cell& c) const { return shape_.in_bounds(c) && blocked_[shape_.index(c)] != 0; }
  /// Returns true if the mark is new.
  bool mark(const Cell& c);
  std::span<const std::uint8_t> mask() const { return blocked_; }
  std::size_t count() const;

 private:
  GridShape shape_;
  std::vector<std::uint8_t> blocked_;
};

/// Grid-aligned geodesic distances in meters; +inf where unreachable.
struct DistanceField {
  GridShape shape;
  std::vector<double> values;
  std::vector<Cell> sources;

  double at(const Cell& c) const { return shape.in_bounds(c) ? values[shape.index(c)] : kInf; }
};

}  // namespace fomnav
