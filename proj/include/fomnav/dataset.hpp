#pragma once

// Ground-truth stopping viewpoints, episode sampling, oracle rollouts and
// the on-disk dataset format.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fomnav/evaluation.hpp"
#include "fomnav/navigator.hpp"
#include "fomnav/simulator.hpp"

namespace fomnav::dataset {

using geometry::Vec2;

struct StopViewpoint {
  Vec2 position = Vec2::Zero();
  int object_id = -1;
};

/// Centers of GT-navigable cells within `max_dist` (closed) of the object
/// footprint from which the object is visible.
std::vector<StopViewpoint> compute_stop_viewpoints(const sim::WorldSpec& world, const sim::NavMap& nav,
                                                   std::size_t object_index,
                                                   double max_dist = evaluation::kSuccessDistance);

/// A world with its precomputed ground truth. Categories without viewpoints
/// are absent from `viewpoints`.
struct Scene {
  sim::WorldSpec world;
  sim::NavMap nav;
  std::uint64_t world_seed = 0;
  std::uint64_t hash = 0;
  std::map<std::string, std::vector<StopViewpoint>> viewpoints;
  std::map<std::string, DistanceField> stop_fields;  // FMM from the viewpoints on `nav`
};

Scene prepare_scene(sim::WorldSpec world, std::uint64_t world_seed = 0);

struct EpisodeSpec {
  std::string id;
  std::uint64_t world_seed = 0;
  std::uint64_t seed = 0;
  std::string target;
  Vec2 start = Vec2::Zero();
  double start_heading_deg = 0;
  double d_G = 0;

  bool operator==(const EpisodeSpec&) const = default;
};

/// Random navigable start (heading a multiple of 30 degrees) and target
/// category with viewpoints, at least `min_geodesic` from the nearest one.
/// Returns nullopt after `max_retries` failed draws.
std::optional<EpisodeSpec> sample_episode(const Scene& scene, std::uint64_t seed, const std::string& id,
                                          int max_retries = 64, double min_geodesic = 1.0);

nav::GroundTruth ground_truth(const Scene& scene, const std::string& target);

struct StepRecord {
  int step = 0;
  policy::PolicySnapshot snapshot;
  GoalChoice label;
  Vec2 position = Vec2::Zero();
  double heading_deg = 0;

  bool operator==(const StepRecord&) const = default;
};

struct ObjectCloud {
  int id = -1;
  std::vector<std::array<float, 3>> points;

  bool operator==(const ObjectCloud&) const = default;
};

struct Episode {
  EpisodeSpec spec;
  std::uint64_t world_hash = 0;
  std::vector<StepRecord> steps;
  std::vector<Action> actions;
  evaluation::EpisodeResult outcome;
  std::vector<ObjectCloud> clouds;  // final object map

  bool operator==(const Episode&) const = default;
};

struct Rollout {
  nav::EpisodeLog log;
  evaluation::EpisodeResult result;
  std::vector<ObjectCloud> clouds;
};

/// Runs `policy` on the episode. Ground truth is handed to the policy only
/// when `privileged`.
Rollout run_episode(const Scene& scene, const EpisodeSpec& spec, policy::Policy& policy,
                    const nav::NavigatorConfig& cfg, bool privileged, const nav::FrameHook& hook = {});

/// Oracle rollout recorded at every policy query.
Episode generate_episode(const Scene& scene, const EpisodeSpec& spec, const nav::NavigatorConfig& cfg);

inline constexpr const char* kFormat = "fomdataset/1";

/// Writes `<dir>/<id>/{meta.json,steps.jsonl,clouds.bin}` for each episode
/// and `<dir>/manifest.json`.
void write_dataset(const std::vector<Episode>& episodes, const std::string& dir, int skipped = 0);
void write_episode(const Episode& episode, const std::string& dir);
/// Episodes listed in the manifest, in manifest order. Throws LoadError
/// naming the episode and, for steps.jsonl, the line.
std::vector<Episode> read_dataset(const std::string& dir);
Episode read_episode(const std::string& episode_dir);
nlohmann::json manifest(const std::vector<Episode>& episodes, int skipped);

}  // namespace fomnav::dataset
