#pragma once

// Episode loop: observe, update the frontier-object map, query the policy,
// plan with FMM + A*, act.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fomnav/action.hpp"
#include "fomnav/mapping.hpp"
#include "fomnav/objects.hpp"
#include "fomnav/planning.hpp"
#include "fomnav/policy.hpp"
#include "fomnav/simulator.hpp"

namespace fomnav::nav {

using geometry::Vec2;

struct NavigatorConfig {
  mapping::MappingConfig mapping;
  objects::ObjectConfig objects;  // pixel thresholds for 640x480, rescaled per episode; borders only apply to noisy masks
  planning::PlanningConfig planning;
  sim::SegmentationNoise noise;
  int max_steps = 500;
  int initial_scan_turns = 12;
  int spin_limit = 12;              // consecutive turns before a frontier goal is dropped
  int object_blacklist_steps = 10;  // how long an unreachable object stays excluded
  int max_queries_per_step = 16;
  int embed_dim = 64;
  std::uint64_t embed_seed = 0x5eedULL;
};

/// Privileged ground truth for the oracle policy.
struct GroundTruth {
  std::vector<Vec2> stops;
  std::vector<std::pair<Vec2, Vec2>> target_footprints;
};

struct QueryRecord {
  int step = 0;
  Vec2 position = Vec2::Zero();
  double heading_deg = 0;
  policy::PolicySnapshot snapshot;
  GoalChoice choice;
};

struct EpisodeLog {
  std::vector<Vec2> positions;  // start plus one entry per executed action
  std::vector<double> headings;
  std::vector<Action> actions;
  std::vector<QueryRecord> queries;
  sim::AgentState final_state;
  std::string abort_reason;  // empty, "dead_end" or "protocol_error"
  std::string abort_message;

  double path_length() const;
};

/// Called after every observation.
struct FrameInfo {
  const mapping::FrontierObjectMap& map;
  const sim::AgentState& state;
  std::optional<GoalChoice> goal;
  const std::vector<Cell>& plan;  // last planned path, possibly stale
};
using FrameHook = std::function<void(const FrameInfo&)>;

class Navigator {
 public:
  Navigator(const sim::WorldSpec& world, std::string target, NavigatorConfig cfg, std::uint64_t seed);

  EpisodeLog run(const sim::AgentState& start, policy::Policy& policy, const GroundTruth* gt = nullptr,
                 const FrameHook& hook = {});

  const mapping::FrontierObjectMap& map() const { return map_; }

 private:
  void observe(const sim::AgentState& s);
  void refresh_distances(const sim::AgentState& s);
  std::optional<planning::Plan> plan_to(const planning::Target& t, const Cell& start);
  void act(sim::AgentState& s, Action a, EpisodeLog& log);

  const sim::WorldSpec& world_;
  std::string target_;
  NavigatorConfig cfg_;
  objects::ObjectConfig obj_cfg_;
  Rng rng_;
  policy::StubEmbedder embedder_;
  mapping::FrontierObjectMap map_;
  std::size_t blocked_version_ = 0;
  int bumps_ = 0;  // consecutive Forward actions that did not move
  std::vector<Cell> last_plan_;

  struct PlanCache {
    std::vector<Cell> cells;
    std::size_t version = static_cast<std::size_t>(-1);
    CellBox roi;
    std::vector<std::uint8_t> blocked;
    DistanceField field;
  } cache_;
};

}  // namespace fomnav::nav
