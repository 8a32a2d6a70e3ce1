#pragma once

// Low-level planning: FMM distance fields, A* guided by them, target
// resolution for goal choices, stopping areas and the steering rule.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fomnav/action.hpp"
#include "fomnav/goal.hpp"
#include "fomnav/grid.hpp"
#include "fomnav/mapping.hpp"

namespace fomnav::planning {

using geometry::Vec2;

using fomnav::Action;

struct PlanningConfig {
  double forward_step = 0.25;
  double turn_deg = 30.0;
  double heading_tolerance_deg = 15.0;
  double stop_radius = 0.80;
  double waypoint_lookahead = 0.25;
  int source_snap_cells = 3;
  double collision_epsilon = 1e-4;
  double collision_mark_radius = 0.10;  // disc marked around the cell ahead
};

struct FmmOptions {
  CellBox roi;         // empty = whole grid; cells outside are +inf
  int snap_cells = 3;  // blocked sources move to the nearest free cell within this radius
  int exact_init_cells = 5;  // Euclidean values within this radius of a source in clear line
};

/// First-order upwind Eikonal solution from `sources` with unit speed over
/// cells where `blocked` is zero. Besides the axis-aligned quadratic update,
/// each cell also accepts a one-sided diagonal update from a diagonal
/// neighbour when both shared orthogonal neighbours are free. Cells near a
/// source whose bounding box with it is free start at the exact distance.
DistanceField fmm_field(const GridShape& shape, std::span<const std::uint8_t> blocked,
                        std::span<const Cell> sources, const FmmOptions& opt = {});

/// Same, with inflated and collision cells blocked and Unknown traversable.
DistanceField fmm_field(const mapping::FrontierObjectMap& map, std::span<const Cell> sources,
                        const FmmOptions& opt = {});

struct Plan {
  std::vector<Cell> cells;  // start first, ends on a zero cell of the field
  double cost = 0;
  std::size_t expanded = 0;
};

/// A* over the 8-connected free graph (no corner cutting) toward any cell
/// where `field` is zero, with the field as heuristic. Throws NoPath.
Plan astar_plan(const GridShape& shape, std::span<const std::uint8_t> blocked, const Cell& start,
                const DistanceField& field);

/// Cells of the navigable map from which the object counts as reached: FMM
/// distance below `stop_radius` from its footprint on a copy of the map with
/// the target, its observation lines and re-inflation removed.
std::vector<Cell> stopping_area(const mapping::FrontierObjectMap& map,
                                const objects::ObjectInstance& obj, double stop_radius);

struct Target {
  std::vector<Cell> cells;
  bool stop_area = false;     // cells form an object stopping area
  int via_frontier = -1;      // frontier used when the object is not reachable yet
};

/// Target cell set for a goal choice. Throws StaleGoal for unknown ids.
Target resolve_goal(const mapping::FrontierObjectMap& map, const GoalChoice& choice,
                    const PlanningConfig& cfg);

/// Steering rule toward the first path cell at least `waypoint_lookahead`
/// away. Stop is emitted only when `at_stop` (agent inside an object stop area).
Action path_to_actions(std::span<const Cell> path, const GridShape& shape, const Vec2& position,
                       double heading_deg, bool at_stop, const PlanningConfig& cfg);

/// Marks the cell one forward step ahead, and the disc of
/// `collision_mark_radius` around it, when a Forward left the agent in place.
/// Returns true if a new cell was marked.
bool record_collision(CollisionMap& collision, const Vec2& before, const Vec2& after,
                      double heading_deg, Action action, const PlanningConfig& cfg);

}  // namespace fomnav::planning
