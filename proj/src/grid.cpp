#include "fomnav/grid.hpp"

namespace fomnav {

std::vector<Cell> disc_offsets(double radius, double resolution) {
  std::vector<Cell> out;
  const int n = static_cast<int>(std::ceil(radius / resolution));
  for (int dr = -n; dr <= n; ++dr)
    for (int dc = -n; dc <= n; ++dc)
      if (std::hypot(dr, dc) * resolution <= radius + 1e-9) out.push_back({dr, dc});
  return out;
}

std::vector<std::uint8_t> inflate_mask(const GridShape& shape, std::span<const std::uint8_t> mask,
                                       double radius, const CellBox& box) {
  std::vector<std::uint8_t> out(shape.size(), 0);
  const CellBox b = box.empty() ? shape.full() : shape.clip(box);
  const auto disc = disc_offsets(radius, shape.resolution);
  for (int r = b.r0; r <= b.r1; ++r)
    for (int c = b.c0; c <= b.c1; ++c) {
      if (!mask[shape.index({r, c})]) continue;
      for (const auto& d : disc) {
        const Cell n{r + d.row, c + d.col};
        if (shape.in_bounds(n)) out[shape.index(n)] = 1;
      }
    }
  return out;
}

OccupancyGrid::OccupancyGrid(const GridShape& shape, double inflation_radius)
    : shape_(shape),
      inflation_radius_(inflation_radius),
      disc_(disc_offsets(inflation_radius, shape.resolution)),
      obstacle_(shape.size(), 0),
      explored_(shape.size(), 0),
      inflated_(shape.size(), 0) {
  if (!(shape.resolution > 0)) throw InvalidInput("grid resolution must be positive");
  if (shape.rows <= 0 || shape.cols <= 0) throw InvalidInput("grid must have cells");
  if (inflation_radius < 0) throw InvalidInput("inflation radius must be non-negative");
}

CellState OccupancyGrid::state(const Cell& c) const {
  const auto i = shape_.index(c);
  if (obstacle_[i]) return CellState::Obstacle;
  if (explored_[i]) return CellState::FreeExplored;
  return CellState::Unknown;
}

bool OccupancyGrid::set_obstacle(const Cell& c) {
  if (!in_bounds(c)) return false;
  const auto i = shape_.index(c);
  if (obstacle_[i]) return false;
  obstacle_[i] = 1;
  known_.expand(c);
  for (const auto& d : disc_) {
    const Cell n{c.row + d.row, c.col + d.col};
    if (in_bounds(n)) inflated_[shape_.index(n)] = 1;
  }
  return true;
}

bool OccupancyGrid::set_explored(const Cell& c) {
  if (!in_bounds(c)) return false;
  const auto i = shape_.index(c);
  if (explored_[i]) return false;
  explored_[i] = 1;
  known_.expand(c);
  return true;
}

std::size_t OccupancyGrid::explored_free_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < explored_.size(); ++i) n += explored_[i] && !obstacle_[i];
  return n;
}

bool CollisionMap::mark(const Cell& c) {
  if (!shape_.in_bounds(c)) return false;
  auto& b = blocked_[shape_.index(c)];
  if (b) return false;
  b = 1;
  return true;
}

std::size_t CollisionMap::count() const {
  std::size_t n = 0;
  for (auto b : blocked_) n += b;
  return n;
}

}  // namespace fomnav
