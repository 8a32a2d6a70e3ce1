#pragma once

// Episode map: accumulated scene cloud, 2D obstacle/exploration grid,
// frontier extraction and frontier bookkeeping.

#include <functional>
#include <optional>
#include <vector>

#include "fomnav/geometry.hpp"
#include "fomnav/grid.hpp"
#include "fomnav/objects.hpp"

namespace fomnav::mapping {

using geometry::Vec2;
using geometry::Vec3;

struct MappingConfig {
  double resolution = 0.05;
  double voxel = 0.05;
  double obstacle_min_z = 0.10;
  double obstacle_max_z = 0.88;  // agent height
  double inflation_radius = 0.18;
  int min_frontier_cells = 4;
  double frontier_overlap = 0.5;
  double frontier_mask_above = 0.5;  // mask top = agent height + this
  double extent = 20.0;              // map side length in meters, centered on the start
  int rays_per_column = 4;
};

struct FrontierGeometry {
  std::vector<Cell> cells;  // ordered along the frontier from end1 to end2
  Cell end1, end2, center;
};

struct Frontier {
  int id = -1;
  std::vector<Cell> cells;
  Cell end1, end2, center_cell;
  Vec2 endpoint1 = Vec2::Zero(), endpoint2 = Vec2::Zero(), center = Vec2::Zero();
  int birth_step = 0;
  double geodesic_dist = kInf;
  std::vector<double> feature;
};

/// Image rectangle, inclusive pixel bounds.
struct PixelRect {
  int u0 = 0, v0 = 0, u1 = -1, v1 = -1;
  bool empty() const { return u1 < u0 || v1 < v0; }
  int width() const { return u1 - u0 + 1; }
  int height() const { return v1 - v0 + 1; }
};

struct FrontierObjectMap {
  MappingConfig config;
  geometry::VoxelAccumulator scene{0.05};
  OccupancyGrid grid;
  std::vector<Frontier> frontiers;
  objects::ObjectStore objects;
  CollisionMap collision;
  std::vector<Vec2> path_history;
  int step = 0;
  int next_frontier_id = 0;

  /// Square map of `config.extent` meters centered on `start`, cell-aligned
  /// to the world origin.
  static FrontierObjectMap create(const MappingConfig& config, const Vec2& start);

  bool navigable(const Cell& c) const {
    return grid.in_bounds(c) && !grid.is_inflated(c) && !collision.blocked(c);
  }
  const Frontier* find_frontier(int id) const;
  /// Inflated cells plus collision marks, one byte per cell.
  std::vector<std::uint8_t> blocked_mask() const;
};

/// Adds the observation to the scene cloud, marks obstacle cells from points
/// in the obstacle height band, and extends the explored region by casting
/// per-column rays up to the nearest band hit or max range. Returns the
/// number of new obstacle cells.
std::size_t integrate_observation(FrontierObjectMap& map, const geometry::DepthImage& depth,
                           const geometry::CameraIntrinsics& intr, const geometry::Pose& pose);

/// FreeExplored, not inflated, with an Unknown 8-neighbour.
bool is_frontier_cell(const OccupancyGrid& grid, const Cell& c);

/// 8-connected frontier components with at least `min_cells` cells, ordered by
/// their lexicographically smallest cell.
std::vector<FrontierGeometry> extract_frontiers(const OccupancyGrid& grid, int min_cells);

/// Projects the frontier extended vertically from the ground to
/// `agent_height + above` meters; nullopt when nothing lands in frame.
std::optional<PixelRect> frontier_pixel_mask(std::span<const Vec2> frontier_points,
                                             const geometry::CameraIntrinsics& intr,
                                             const geometry::Pose& pose, double agent_height,
                                             double above = 0.5);

using FeatureFn = std::function<std::vector<double>(const FrontierGeometry&)>;

/// Carries ids across frames: a component with at least `overlap` of its cells
/// in an old frontier inherits that frontier's id, birth step and feature.
std::vector<Frontier> reconcile_frontiers(const std::vector<Frontier>& old,
                                          const std::vector<FrontierGeometry>& fresh,
                                          const GridShape& shape, int step, int& next_id,
                                          const FeatureFn& make_feature, double overlap = 0.5);

}  // namespace fomnav::mapping
