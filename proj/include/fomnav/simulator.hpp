#pragma once

// Box-world simulator: axis-aligned walls and objects on a flat floor,
// column-coherent raycast depth with instance ids, discrete agent dynamics
// and a procedural grid-of-rooms generator.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fomnav/action.hpp"
#include "fomnav/geometry.hpp"
#include "fomnav/grid.hpp"
#include "fomnav/objects.hpp"

namespace fomnav::sim {

using geometry::Vec2;
using geometry::Vec3;

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec2 footprint_min() const { return min.head<2>(); }
  Vec2 footprint_max() const { return max.head<2>(); }
};

/// Horizontal distance from `p` to the footprint rectangle of `b` (0 inside).
double footprint_distance(const Box& b, const Vec2& p);

struct WorldObject {
  int id = 0;
  std::string category;
  Box box;
};

struct AgentConfig {
  double radius = 0.18;
  double camera_height = 0.88;
  double hfov_deg = 79.0;
  double max_range = 5.0;
  int width = 640;
  int height = 480;
};

struct WorldSpec {
  std::vector<std::string> categories;
  Vec2 bounds_min = Vec2::Zero();
  Vec2 bounds_max = Vec2::Zero();
  std::vector<Box> walls;
  std::vector<WorldObject> objects;
  AgentConfig agent;

  int category_index(const std::string& name) const;  // -1 if undeclared
  void validate() const;
};

struct AgentState {
  Vec2 position = Vec2::Zero();
  double heading_deg = 0;
  int steps = 0;
  bool stopped = false;
};

struct Observation {
  geometry::DepthImage depth;
  std::vector<int> segments;  // per pixel object index into WorldSpec::objects, -1 background
  geometry::Pose pose;
  geometry::CameraIntrinsics intrinsics;
};

geometry::CameraIntrinsics intrinsics(const AgentConfig& agent);
geometry::Pose camera_pose(const AgentConfig& agent, const AgentState& state);

Observation render(const WorldSpec& world, const AgentState& state);

/// True if a disc of the agent radius at `p` intersects a wall or object.
bool collides(const WorldSpec& world, const Vec2& p);

/// Applies one action. Every action counts as a step. Throws InvalidInput
/// after Stop.
AgentState step(const WorldSpec& world, const AgentState& state, Action action,
                double forward_step = 0.25, double turn_deg = 30.0);

/// Ground-truth navigability at `resolution`: a cell is free when its center
/// is at least the agent radius away from every box.
struct NavMap {
  GridShape shape;
  std::vector<std::uint8_t> blocked;

  bool free(const Cell& c) const { return shape.in_bounds(c) && !blocked[shape.index(c)]; }
};
NavMap gt_navigability(const WorldSpec& world, double resolution = 0.05);

/// Number of 4-connected components of free cells.
int free_components(const NavMap& nav);

/// Object `index` seen from `position` with the camera at its height, over
/// a full heading sweep: some surface sample is unoccluded, within max range
/// and inside the vertical field of view.
bool object_visible(const WorldSpec& world, std::size_t index, const Vec2& position);

struct SegmentationNoise {
  double flip_probability = 0;  // label replaced by a random other category
  int erosion = 0;              // mask erosion in pixels

  /// Noisy masks stand in for a learned segmenter's output.
  bool automatic() const { return flip_probability > 0 || erosion > 0; }
};

/// Instance masks from the ground-truth segment image, in object order.
/// Category distributions are one-hot over `world.categories`.
std::vector<objects::SegmentMask> gt_segments(const WorldSpec& world, const Observation& obs,
                                              const SegmentationNoise& noise, Rng& rng);

struct GenParams {
  int min_rooms = 2;
  int max_rooms = 4;
  double room_min = 3.0;
  double room_max = 4.5;
  double door_min = 0.9;
  double door_max = 1.1;
  double extra_door_probability = 0.3;
  double objects_per_room = 1.5;
  std::vector<std::string> categories = {"chair", "bed", "plant", "toilet", "tv_monitor", "sofa"};
  AgentConfig agent;
};

/// Deterministic per (seed, params). Throws GenerationError for unusable params.
WorldSpec generate_world(std::uint64_t seed, const GenParams& params);

nlohmann::json world_to_json(const WorldSpec& world);
WorldSpec world_from_json(const nlohmann::json& j);
void save_world(const WorldSpec& world, const std::string& path);
WorldSpec load_world(const std::string& path);
/// FNV-1a of the canonical JSON dump.
std::uint64_t world_hash(const WorldSpec& world);

}  // namespace fomnav::sim
