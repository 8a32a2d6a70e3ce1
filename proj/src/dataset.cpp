#include "fomnav/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fomnav/planning.hpp"
#include "fomnav/protocol.hpp"

namespace fomnav::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<StopViewpoint> compute_stop_viewpoints(const sim::WorldSpec& world, const sim::NavMap& nav,
                                                   std::size_t object_index, double max_dist) {
  const auto& obj = world.objects.at(object_index);
  const Vec2 pad(max_dist, max_dist);
  const Cell lo = nav.shape.cell_of(obj.box.footprint_min() - pad);
  const Cell hi = nav.shape.cell_of(obj.box.footprint_max() + pad);
  std::vector<StopViewpoint> out;
  for (int r = lo.row; r <= hi.row; ++r)
    for (int c = lo.col; c <= hi.col; ++c) {
      const Cell cell{r, c};
      if (!nav.free(cell)) continue;
      const Vec2 p = nav.shape.center_of(cell);
      if (sim::footprint_distance(obj.box, p) > max_dist) continue;
      if (!sim::object_visible(world, object_index, p)) continue;
      out.push_back({p, obj.id});
    }
  return out;
}

Scene prepare_scene(sim::WorldSpec world, std::uint64_t world_seed) {
  Scene s;
  s.world = std::move(world);
  s.world_seed = world_seed;
  s.hash = sim::world_hash(s.world);
  s.nav = sim::gt_navigability(s.world);
  for (std::size_t i = 0; i < s.world.objects.size(); ++i) {
    auto vps = compute_stop_viewpoints(s.world, s.nav, i);
    if (vps.empty()) continue;
    auto& dst = s.viewpoints[s.world.objects[i].category];
    dst.insert(dst.end(), vps.begin(), vps.end());
  }
  planning::FmmOptions opt;
  opt.snap_cells = 0;
  for (const auto& [cat, vps] : s.viewpoints) {
    std::vector<Cell> sources;
    for (const auto& v : vps) sources.push_back(s.nav.shape.cell_of(v.position));
    s.stop_fields[cat] = planning::fmm_field(s.nav.shape, s.nav.blocked, sources, opt);
  }
  return s;
}

std::optional<EpisodeSpec> sample_episode(const Scene& scene, std::uint64_t seed, const std::string& id,
                                          int max_retries, double min_geodesic) {
  if (scene.viewpoints.empty()) return std::nullopt;
  std::vector<std::string> cats;
  for (const auto& [cat, _] : scene.viewpoints) cats.push_back(cat);
  std::vector<std::size_t> free_cells;
  for (std::size_t i = 0; i < scene.nav.blocked.size(); ++i)
    if (!scene.nav.blocked[i]) free_cells.push_back(i);
  if (free_cells.empty()) return std::nullopt;

  Rng rng(seed);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const auto& cat = cats[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(cats.size()) - 1))];
    const auto idx = free_cells[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(free_cells.size()) - 1))];
    const double heading = 30.0 * rng.uniform_int(0, 11);
    const Cell cell = scene.nav.shape.cell_at(idx);
    const Vec2 start = scene.nav.shape.center_of(cell);
    const double d = scene.stop_fields.at(cat).at(cell);
    if (!std::isfinite(d) || d < min_geodesic || sim::collides(scene.world, start)) continue;
    EpisodeSpec spec;
    spec.id = id;
    spec.world_seed = scene.world_seed;
    spec.seed = seed;
    spec.target = cat;
    spec.start = start;
    spec.start_heading_deg = heading;
    spec.d_G = d;
    return spec;
  }
  return std::nullopt;
}

nav::GroundTruth ground_truth(const Scene& scene, const std::string& target) {
  nav::GroundTruth gt;
  if (auto it = scene.viewpoints.find(target); it != scene.viewpoints.end())
    for (const auto& v : it->second) gt.stops.push_back(v.position);
  for (const auto& o : scene.world.objects)
    if (o.category == target) gt.target_footprints.emplace_back(o.box.footprint_min(), o.box.footprint_max());
  return gt;
}

Rollout run_episode(const Scene& scene, const EpisodeSpec& spec, policy::Policy& policy,
                    const nav::NavigatorConfig& cfg, bool privileged, const nav::FrameHook& hook) {
  nav::Navigator navigator(scene.world, spec.target, cfg, spec.seed);
  const auto gt = ground_truth(scene, spec.target);
  sim::AgentState start;
  start.position = spec.start;
  start.heading_deg = spec.start_heading_deg;

  Rollout out;
  out.log = navigator.run(start, policy, privileged ? &gt : nullptr, hook);
  evaluation::Trajectory t;
  t.positions = out.log.positions;
  t.steps = out.log.final_state.steps;
  t.stopped = out.log.final_state.stopped;
  t.abort_reason = out.log.abort_reason;
  out.result = evaluation::judge(scene.world, t, spec.target, spec.d_G);
  out.result.episode_id = spec.id;
  for (const auto& o : navigator.map().objects.objects) {
    ObjectCloud c;
    c.id = o.id;
    for (const auto& p : o.cloud.points)
      c.points.push_back({static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())});
    out.clouds.push_back(std::move(c));
  }
  return out;
}

Episode generate_episode(const Scene& scene, const EpisodeSpec& spec, const nav::NavigatorConfig& cfg) {
  policy::OraclePolicy oracle;
  auto r = run_episode(scene, spec, oracle, cfg, true);
  Episode ep;
  ep.spec = spec;
  ep.world_hash = scene.hash;
  for (auto& q : r.log.queries)
    ep.steps.push_back({q.step, std::move(q.snapshot), q.choice, q.position, q.heading_deg});
  ep.actions = r.log.actions;
  ep.outcome = r.result;
  ep.clouds = std::move(r.clouds);
  return ep;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 16);
  if (used != s.size()) throw std::invalid_argument("bad hex");
  return v;
}

json step_to_json(const StepRecord& r) {
  json feats{{"frontiers", json::array()}, {"objects", json::array()}};
  for (const auto& f : r.snapshot.frontiers) feats["frontiers"].push_back(f.feature);
  for (const auto& o : r.snapshot.objects) feats["objects"].push_back(o.feature);
  return {{"step", r.step},
          {"position", {r.position.x(), r.position.y()}},
          {"heading_deg", r.heading_deg},
          {"snapshot", protocol::snapshot_to_json(r.snapshot)},
          {"features", feats},
          {"label", json::parse(protocol::encode_response(r.label))}};
}

StepRecord step_from_json(const json& j) {
  StepRecord r;
  r.step = j.at("step").get<int>();
  const auto p = j.at("position").get<std::array<double, 2>>();
  r.position = {p[0], p[1]};
  r.heading_deg = j.at("heading_deg").get<double>();
  r.snapshot = protocol::snapshot_from_json(j.at("snapshot"));
  const auto& ff = j.at("features").at("frontiers");
  const auto& of = j.at("features").at("objects");
  if (ff.size() != r.snapshot.frontiers.size() || of.size() != r.snapshot.objects.size())
    throw LoadError("feature count does not match the snapshot");
  for (std::size_t i = 0; i < ff.size(); ++i) r.snapshot.frontiers[i].feature = ff[i].get<std::vector<double>>();
  for (std::size_t i = 0; i < of.size(); ++i) r.snapshot.objects[i].feature = of[i].get<std::vector<double>>();
  r.label = protocol::parse_response(j.at("label").dump(), r.snapshot);
  return r;
}

void put_f32(std::ostream& os, float f) {
  const auto u = std::bit_cast<std::uint32_t>(f);
  const char b[4] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
                     static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
  os.write(b, 4);
}

float get_f32(const unsigned char* b) {
  const std::uint32_t u = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
                          std::uint32_t(b[3]) << 24;
  return std::bit_cast<float>(u);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
  if (!os) throw Error("cannot write " + p.string());
}

}  // namespace

void write_episode(const Episode& ep, const std::string& dir) {
  const fs::path root = fs::path(dir) / ep.spec.id;
  fs::create_directories(root);

  json meta;
  meta["format"] = kFormat;
  meta["id"] = ep.spec.id;
  meta["world_seed"] = ep.spec.world_seed;
  meta["seed"] = ep.spec.seed;
  meta["world_hash"] = hex64(ep.world_hash);
  meta["target"] = ep.spec.target;
  meta["start"] = {ep.spec.start.x(), ep.spec.start.y()};
  meta["start_heading_deg"] = ep.spec.start_heading_deg;
  meta["d_G"] = ep.spec.d_G;
  meta["actions"] = json::array();
  for (auto a : ep.actions) meta["actions"].push_back(to_string(a));
  meta["outcome"] = evaluation::result_to_json(ep.outcome);
  meta["step_records"] = ep.steps.size();
  meta["clouds"] = json::array();
  std::size_t offset = 0;
  for (const auto& c : ep.clouds) {
    meta["clouds"].push_back({{"id", c.id}, {"offset", offset}, {"count", c.points.size()}});
    offset += c.points.size();
  }
  write_text(root / "meta.json", meta.dump(1) + "\n");

  std::ostringstream steps;
  for (const auto& r : ep.steps) steps << step_to_json(r).dump() << '\n';
  write_text(root / "steps.jsonl", steps.str());

  std::ofstream bin(root / "clouds.bin", std::ios::binary);
  for (const auto& c : ep.clouds)
    for (const auto& p : c.points)
      for (float f : p) put_f32(bin, f);
  if (!bin) throw Error("cannot write " + (root / "clouds.bin").string());
}

json manifest(const std::vector<Episode>& episodes, int skipped) {
  json m;
  m["format"] = kFormat;
  m["episodes"] = json::array();
  std::vector<evaluation::EpisodeResult> results;
  for (const auto& ep : episodes) {
    m["episodes"].push_back({{"id", ep.spec.id},
                             {"world_seed", ep.spec.world_seed},
                             {"seed", ep.spec.seed},
                             {"world_hash", hex64(ep.world_hash)},
                             {"target", ep.spec.target},
                             {"success", ep.outcome.success},
                             {"steps", ep.outcome.steps},
                             {"step_records", ep.steps.size()}});
    results.push_back(ep.outcome);
  }
  json stats{{"episodes", episodes.size()}, {"skipped", skipped}};
  if (!results.empty()) stats["report"] = evaluation::report_to_json(evaluation::aggregate(results));
  m["stats"] = stats;
  return m;
}

void write_dataset(const std::vector<Episode>& episodes, const std::string& dir, int skipped) {
  fs::create_directories(dir);
  for (const auto& ep : episodes) write_episode(ep, dir);
  write_text(fs::path(dir) / "manifest.json", manifest(episodes, skipped).dump(1) + "\n");
}

Episode read_episode(const std::string& episode_dir) {
  const fs::path root(episode_dir);
  const std::string name = root.filename().string();
  auto fail = [&](const std::string& what) { return LoadError("episode " + name + ": " + what); };

  Episode ep;
  std::vector<std::pair<int, std::pair<std::size_t, std::size_t>>> cloud_index;
  std::size_t expected_records = 0;
  {
    std::ifstream is(root / "meta.json");
    if (!is) throw fail("missing meta.json");
    try {
      const json meta = json::parse(is);
      if (meta.at("format").get<std::string>() != kFormat)
        throw fail("unsupported format '" + meta.at("format").get<std::string>() + "'");
      ep.spec.id = meta.at("id").get<std::string>();
      ep.spec.world_seed = meta.at("world_seed").get<std::uint64_t>();
      ep.spec.seed = meta.at("seed").get<std::uint64_t>();
      ep.world_hash = parse_hex64(meta.at("world_hash").get<std::string>());
      ep.spec.target = meta.at("target").get<std::string>();
      const auto s = meta.at("start").get<std::array<double, 2>>();
      ep.spec.start = {s[0], s[1]};
      ep.spec.start_heading_deg = meta.at("start_heading_deg").get<double>();
      ep.spec.d_G = meta.at("d_G").get<double>();
      for (const auto& a : meta.at("actions")) {
        const auto act = action_from_string(a.get<std::string>());
        if (!act) throw fail("unknown action '" + a.get<std::string>() + "'");
        ep.actions.push_back(*act);
      }
      ep.outcome = evaluation::result_from_json(meta.at("outcome"));
      expected_records = meta.at("step_records").get<std::size_t>();
      for (const auto& c : meta.at("clouds"))
        cloud_index.push_back({c.at("id").get<int>(), {c.at("offset").get<std::size_t>(), c.at("count").get<std::size_t>()}});
    } catch (const LoadError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(std::string("meta.json: ") + e.what());
    }
  }

  {
    std::ifstream is(root / "steps.jsonl");
    if (!is) throw fail("missing steps.jsonl");
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      try {
        ep.steps.push_back(step_from_json(json::parse(line)));
      } catch (const std::exception& e) {
        throw fail("steps.jsonl line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    if (ep.steps.size() != expected_records)
      throw fail("steps.jsonl has " + std::to_string(ep.steps.size()) + " records, meta.json lists " +
                 std::to_string(expected_records));
  }

  {
    std::ifstream is(root / "clouds.bin", std::ios::binary);
    if (!is) throw fail("missing clouds.bin");
    const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const auto* b = reinterpret_cast<const unsigned char*>(bytes.data());
    std::size_t total = 0;
    for (const auto& [id, range] : cloud_index) {
      if (range.first != total) throw fail("clouds.bin offsets are not contiguous");
      total += range.second;
    }
    if (bytes.size() != total * 12)
      throw fail("clouds.bin holds " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(total * 12));
    for (const auto& [id, range] : cloud_index) {
      ObjectCloud c;
      c.id = id;
      for (std::size_t i = 0; i < range.second; ++i) {
        const auto* p = b + (range.first + i) * 12;
        c.points.push_back({get_f32(p), get_f32(p + 4), get_f32(p + 8)});
      }
      ep.clouds.push_back(std::move(c));
    }
  }
  return ep;
}

std::vector<Episode> read_dataset(const std::string& dir) {
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) throw LoadError("missing manifest.json in " + dir);
  json m;
  try {
    m = json::parse(is);
  } catch (const std::exception& e) {
    throw LoadError(std::string("manifest.json: ") + e.what());
  }
  if (m.value("format", "") != kFormat) throw LoadError("manifest.json: unsupported format");
  std::vector<Episode> out;
  for (const auto& e : m.at("episodes")) {
    const auto id = e.at("id").get<std::string>();
    out.push_back(read_episode((fs::path(dir) / id).string()));
    if (out.back().spec.id != id) throw LoadError("episode " + id + ": id in meta.json does not match");
  }
  return out;
}

}  // namespace fomnav::dataset
