#include "fomnav/config.hpp"

#include <fstream>
#include <set>

namespace fomnav::config {

using nlohmann::json;

namespace {

template <class F>
void visit(RunConfig& c, F&& f) {
  auto& m = c.nav.mapping;
  f("mapping", "resolution", m.resolution);
  f("mapping", "voxel", m.voxel);
  f("mapping", "obstacle_min_z", m.obstacle_min_z);
  f("mapping", "obstacle_max_z", m.obstacle_max_z);
  f("mapping", "inflation_radius", m.inflation_radius);
  f("mapping", "min_frontier_cells", m.min_frontier_cells);
  f("mapping", "frontier_overlap", m.frontier_overlap);
  f("mapping", "frontier_mask_above", m.frontier_mask_above);
  f("mapping", "extent", m.extent);
  f("mapping", "rays_per_column", m.rays_per_column);

  auto& o = c.nav.objects;
  f("objects", "voxel", o.voxel);
  f("objects", "dbscan_eps", o.dbscan_eps);
  f("objects", "dbscan_min_pts", o.dbscan_min_pts);
  f("objects", "merge_delta", o.merge_delta);
  f("objects", "merge_ratio", o.merge_ratio);
  f("objects", "min_mask_pixels", o.min_mask_pixels);
  f("objects", "border_top_bottom", o.border_top_bottom);
  f("objects", "border_left_right", o.border_left_right);

  auto& p = c.nav.planning;
  f("planning", "forward_step", p.forward_step);
  f("planning", "turn_deg", p.turn_deg);
  f("planning", "heading_tolerance_deg", p.heading_tolerance_deg);
  f("planning", "stop_radius", p.stop_radius);
  f("planning", "waypoint_lookahead", p.waypoint_lookahead);
  f("planning", "source_snap_cells", p.source_snap_cells);
  f("planning", "collision_epsilon", p.collision_epsilon);
  f("planning", "collision_mark_radius", p.collision_mark_radius);

  f("noise", "flip_probability", c.nav.noise.flip_probability);
  f("noise", "erosion", c.nav.noise.erosion);

  f("navigator", "max_steps", c.nav.max_steps);
  f("navigator", "initial_scan_turns", c.nav.initial_scan_turns);
  f("navigator", "spin_limit", c.nav.spin_limit);
  f("navigator", "object_blacklist_steps", c.nav.object_blacklist_steps);
  f("navigator", "max_queries_per_step", c.nav.max_queries_per_step);
  f("navigator", "embed_dim", c.nav.embed_dim);
  f("navigator", "embed_seed", c.nav.embed_seed);

  auto& w = c.world;
  f("world", "min_rooms", w.min_rooms);
  f("world", "max_rooms", w.max_rooms);
  f("world", "room_min", w.room_min);
  f("world", "room_max", w.room_max);
  f("world", "door_min", w.door_min);
  f("world", "door_max", w.door_max);
  f("world", "extra_door_probability", w.extra_door_probability);
  f("world", "objects_per_room", w.objects_per_room);
  f("world", "categories", w.categories);

  auto& a = c.world.agent;
  f("agent", "radius", a.radius);
  f("agent", "camera_height", a.camera_height);
  f("agent", "hfov_deg", a.hfov_deg);
  f("agent", "max_range", a.max_range);
  f("agent", "width", a.width);
  f("agent", "height", a.height);
}

}  // namespace

void apply(const json& doc, RunConfig& cfg) {
  if (!doc.is_object()) throw InvalidInput("config must be a JSON object");
  std::set<std::string> known;
  visit(cfg, [&](const char* section, const char* key, auto& field) {
    known.insert(std::string(section) + "." + key);
    known.insert(section);
    if (!doc.contains(section)) return;
    const auto& sec = doc.at(section);
    if (!sec.is_object()) throw InvalidInput(std::string("config section '") + section + "' must be an object");
    if (!sec.contains(key)) return;
    try {
      field = sec.at(key).get<std::remove_reference_t<decltype(field)>>();
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("config key ") + section + "." + key + ": " + e.what());
    }
  });
  for (const auto& [section, body] : doc.items()) {
    if (!known.count(section)) throw InvalidInput("unknown config section '" + section + "'");
    for (const auto& [key, _] : body.items())
      if (!known.count(section + "." + key)) throw InvalidInput("unknown config key " + section + "." + key);
  }
}

json to_json(const RunConfig& cfg) {
  json doc = json::object();
  RunConfig copy = cfg;
  visit(copy, [&](const char* section, const char* key, auto& field) { doc[section][key] = field; });
  return doc;
}

RunConfig load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw LoadError("cannot open config " + path);
  RunConfig cfg;
  try {
    config::apply(json::parse(is), cfg);
  } catch (const json::exception& e) {
    throw LoadError("config " + path + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw LoadError("config " + path + ": " + e.what());
  }
  return cfg;
}

}  // namespace fomnav::config
