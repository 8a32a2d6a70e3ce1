#include "fomnav/navigator.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace fomnav::nav {

double EpisodeLog::path_length() const {
  double d = 0;
  for (std::size_t i = 1; i < positions.size(); ++i) d += (positions[i] - positions[i - 1]).norm();
  return d;
}

Navigator::Navigator(const sim::WorldSpec& world, std::string target, NavigatorConfig cfg, std::uint64_t seed)
    : world_(world),
      target_(std::move(target)),
      cfg_(std::move(cfg)),
      obj_cfg_(cfg_.objects.scaled_to(world.agent.width, world.agent.height)),
      rng_(seed),
      embedder_(cfg_.embed_dim, cfg_.embed_seed) {
  if (world_.category_index(target_) < 0) throw InvalidInput("target category not declared: " + target_);
  // Border rejection targets partial masks from a learned segmenter.
  if (!cfg_.noise.automatic()) {
    obj_cfg_.border_top_bottom = 0;
    obj_cfg_.border_left_right = 0;
  }
}

namespace {

double mean_depth(const geometry::DepthImage& depth, const geometry::CameraIntrinsics& intr,
                  const mapping::PixelRect& r) {
  double s = 0;
  int n = 0;
  for (int v = r.v0; v <= r.v1; ++v)
    for (int u = r.u0; u <= r.u1; ++u) {
      const double d = depth.at(u, v);
      if (geometry::valid_depth(d, intr)) {
        s += d;
        ++n;
      }
    }
  return n ? s / n : intr.max_range;
}

}  // namespace

void Navigator::observe(const sim::AgentState& s) {
  const auto obs = sim::render(world_, s);
  const auto& intr = obs.intrinsics;
  if (mapping::integrate_observation(map_, obs.depth, intr, obs.pose) > 0) ++blocked_version_;

  const auto k = world_.categories.size();
  auto masks = sim::gt_segments(world_, obs, cfg_.noise, rng_);
  std::vector<int> pixel_cat(obs.segments.size(), -1);
  for (auto& m : masks) {
    const auto cat = static_cast<std::size_t>(
        std::max_element(m.category_dist.begin(), m.category_dist.end()) - m.category_dist.begin());
    double ds = 0;
    for (int p : m.pixels) {
      pixel_cat[static_cast<std::size_t>(p)] = static_cast<int>(cat);
      ds += obs.depth.data[static_cast<std::size_t>(p)];
    }
    std::vector<double> onehot(k, 0.0);
    onehot[cat] = 1.0;
    m.feature = embedder_.visual(onehot, world_.categories, ds / static_cast<double>(m.pixels.size()));
  }
  for (auto& c : objects::ingest_segments(masks, obs.depth, intr, obs.pose, obj_cfg_)) {
    c.observers = {s.position};
    c.last_seen_step = map_.step;
    objects::merge_step(map_.objects, std::move(c), obj_cfg_);
  }

  const auto shape = map_.grid.shape();
  const mapping::PixelRect whole{0, 0, intr.width - 1, intr.height - 1};
  auto feature = [&](const mapping::FrontierGeometry& g) {
    std::vector<Vec2> pts;
    pts.reserve(g.cells.size());
    for (const auto& c : g.cells) pts.push_back(shape.center_of(c));
    const auto rect = mapping::frontier_pixel_mask(pts, intr, obs.pose, world_.agent.camera_height,
                                                   cfg_.mapping.frontier_mask_above)
                          .value_or(whole);
    std::vector<double> hist(k, 0.0);
    for (int v = rect.v0; v <= rect.v1; ++v)
      for (int u = rect.u0; u <= rect.u1; ++u) {
        const int c = pixel_cat[static_cast<std::size_t>(v) * intr.width + u];
        if (c >= 0) hist[static_cast<std::size_t>(c)] += 1.0;
      }
    return embedder_.visual(hist, world_.categories, mean_depth(obs.depth, intr, rect));
  };
  const auto fresh = mapping::extract_frontiers(map_.grid, cfg_.mapping.min_frontier_cells);
  map_.frontiers = mapping::reconcile_frontiers(map_.frontiers, fresh, shape, map_.step, map_.next_frontier_id,
                                                feature, cfg_.mapping.frontier_overlap);
}

void Navigator::refresh_distances(const sim::AgentState& s) {
  const auto& shape = map_.grid.shape();
  const Cell agent = shape.cell_of(s.position);
  CellBox roi = map_.grid.known_box();
  roi.expand(agent);
  planning::FmmOptions opt;
  opt.roi = shape.clip(roi.dilated(2));
  opt.snap_cells = cfg_.planning.source_snap_cells;
  DistanceField field;
  try {
    field = planning::fmm_field(map_, std::span<const Cell>(&agent, 1), opt);
  } catch (const UnreachableSource&) {
    field.shape = shape;
    field.values.assign(shape.size(), kInf);
  }
  for (auto& f : map_.frontiers) f.geodesic_dist = field.at(f.center_cell);
  objects::refresh_object_geometry(map_.objects, map_.grid, map_.collision, field);
}

std::optional<planning::Plan> Navigator::plan_to(const planning::Target& t, const Cell& start) {
  const auto& shape = map_.grid.shape();
  if (cache_.version != blocked_version_) {
    cache_.cells.clear();
    cache_.blocked = map_.blocked_mask();
    cache_.version = blocked_version_;
  }
  const bool reuse = cache_.cells == t.cells && cache_.roi.contains(start);
  if (!reuse) {
    CellBox roi = map_.grid.known_box();
    for (const auto& c : t.cells) roi.expand(c);
    roi.expand(start);
    planning::FmmOptions opt;
    opt.roi = shape.clip(roi.dilated(2));
    opt.snap_cells = cfg_.planning.source_snap_cells;
    try {
      cache_.field = planning::fmm_field(shape, cache_.blocked, t.cells, opt);
    } catch (const UnreachableSource&) {
      cache_.cells.clear();
      return std::nullopt;
    }
    cache_.cells = t.cells;
    cache_.roi = opt.roi;
  }

  // The agent may stand inside freshly inflated cells; start from the
  // nearest free cell instead.
  Cell from = start;
  if (!map_.navigable(from) || cache_.field.at(from) == kInf) {
    bool found = false;
    double best = kInf;
    const int r = cfg_.planning.source_snap_cells;
    for (int dr = -r; dr <= r; ++dr)
      for (int dc = -r; dc <= r; ++dc) {
        const Cell c{start.row + dr, start.col + dc};
        const double d = dr * dr + dc * dc;
        if (d > r * r || !map_.navigable(c) || cache_.field.at(c) == kInf) continue;
        if (d < best || (d == best && c < from)) {
          best = d;
          from = c;
          found = true;
        }
      }
    if (!found) return std::nullopt;
  }
  try {
    return planning::astar_plan(shape, cache_.blocked, from, cache_.field);
  } catch (const NoPath&) {
    return std::nullopt;
  }
}

void Navigator::act(sim::AgentState& s, Action a, EpisodeLog& log) {
  const Vec2 before = s.position;
  const double heading = s.heading_deg;
  s = sim::step(world_, s, a, cfg_.planning.forward_step, cfg_.planning.turn_deg);
  // Repeated bumps from the same pose grow the marked disc so the plan
  // eventually bends away from the obstacle.
  auto pcfg = cfg_.planning;
  pcfg.collision_mark_radius = std::min(pcfg.collision_mark_radius * (1 + bumps_),
                                        pcfg.forward_step - map_.grid.resolution());
  if (planning::record_collision(map_.collision, before, s.position, heading, a, pcfg)) ++blocked_version_;
  if (a == Action::Forward) bumps_ = (s.position - before).norm() < pcfg.collision_epsilon ? bumps_ + 1 : 0;
  ++map_.step;
  map_.path_history.push_back(s.position);
  log.positions.push_back(s.position);
  log.headings.push_back(s.heading_deg);
  log.actions.push_back(a);
}

EpisodeLog Navigator::run(const sim::AgentState& start, policy::Policy& policy, const GroundTruth* gt,
                          const FrameHook& hook) {
  // The map is centered on the start; grow it until it covers the world.
  auto mapping_cfg = cfg_.mapping;
  const Vec2 reach = (world_.bounds_max - start.position).cwiseMax(start.position - world_.bounds_min);
  mapping_cfg.extent = std::max(mapping_cfg.extent, 2.0 * reach.maxCoeff() + 1.0);
  map_ = mapping::FrontierObjectMap::create(mapping_cfg, start.position);
  map_.path_history = {start.position};
  blocked_version_ = 0;
  bumps_ = 0;
  last_plan_.clear();
  cache_ = PlanCache{};

  EpisodeLog log;
  log.positions = {start.position};
  log.headings = {start.heading_deg};
  sim::AgentState s = start;
  auto finish = [&](std::string reason, std::string message) {
    log.abort_reason = std::move(reason);
    log.abort_message = std::move(message);
    log.final_state = s;
    return log;
  };

  std::optional<GoalChoice> goal;
  observe(s);
  if (hook) hook({map_, s, goal, last_plan_});
  for (int i = 0; i < cfg_.initial_scan_turns && s.steps < cfg_.max_steps; ++i) {
    act(s, Action::TurnLeft, log);
    observe(s);
    if (hook) hook({map_, s, goal, last_plan_});
  }

  bool need_query = true;
  int spin = 0;
  std::set<int> dropped_frontiers;
  std::map<int, int> dropped_objects;  // id -> step the exclusion expires

  auto drop_goal = [&]() {
    if (!goal) return;
    if (goal->kind == GoalKind::Frontier)
      dropped_frontiers.insert(goal->id);
    else
      dropped_objects[goal->id] = map_.step + cfg_.object_blacklist_steps;
    need_query = true;
    spin = 0;
  };

  const auto& shape = map_.grid.shape();
  while (s.steps < cfg_.max_steps) {
    bool acted = false;
    for (int attempt = 0; attempt < cfg_.max_queries_per_step && !acted; ++attempt) {
      if (need_query || !goal) {
        for (auto it = dropped_objects.begin(); it != dropped_objects.end();)
          it = it->second <= map_.step ? dropped_objects.erase(it) : std::next(it);
        refresh_distances(s);
        auto snap = policy::make_snapshot(map_, s.position, s.heading_deg, target_, world_.categories);
        std::erase_if(snap.frontiers, [&](const auto& f) { return dropped_frontiers.count(f.id) != 0; });
        std::erase_if(snap.objects, [&](const auto& o) { return dropped_objects.count(o.id) != 0; });
        policy::OracleContext ctx;
        if (gt) {
          ctx.map = &map_;
          ctx.gt_stops = gt->stops;
          ctx.target_footprints = gt->target_footprints;
          ctx.min_points = obj_cfg_.dbscan_min_pts;
          for (const auto& [id, _] : dropped_objects) ctx.excluded_objects.push_back(id);
        }
        try {
          goal = policy.select(snap, gt ? &ctx : nullptr);
        } catch (const NoGoal& e) {
          return finish("dead_end", e.what());
        } catch (const DeadEnd& e) {
          return finish("dead_end", e.what());
        } catch (const ProtocolError& e) {
          return finish("protocol_error", e.what());
        }
        log.queries.push_back({s.steps, s.position, s.heading_deg, std::move(snap), *goal});
        need_query = false;
        spin = 0;
      }

      planning::Target target;
      try {
        target = planning::resolve_goal(map_, *goal, cfg_.planning);
      } catch (const StaleGoal&) {
        need_query = true;
        continue;
      }
      if (target.cells.empty()) {
        drop_goal();
        continue;
      }
      const Cell here = shape.cell_of(s.position);
      const bool at_stop = target.stop_area && std::find(target.cells.begin(), target.cells.end(), here) != target.cells.end();
      Action a = Action::Stop;
      if (!at_stop) {
        const auto plan = plan_to(target, here);
        if (!plan) {
          drop_goal();
          continue;
        }
        a = planning::path_to_actions(plan->cells, shape, s.position, s.heading_deg, false, cfg_.planning);
        last_plan_ = plan->cells;
      }
      if (a == Action::TurnLeft || a == Action::TurnRight) {
        if (++spin > cfg_.spin_limit) {
          drop_goal();
          continue;
        }
      } else {
        spin = 0;
      }
      act(s, a, log);
      acted = true;
      if (a == Action::Stop) return finish("", "");
      observe(s);
      if (hook) hook({map_, s, goal, last_plan_});
      if (a == Action::Forward) need_query = true;
    }
    if (!acted) {
      // Every goal this step was unusable; look around and try again.
      act(s, Action::TurnLeft, log);
      observe(s);
      if (hook) hook({map_, s, goal, last_plan_});
      need_query = true;
    }
  }
  return finish("", "");
}

}  // namespace fomnav::nav
