#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <thread>

#include "fomnav/config.hpp"
#include "fomnav/dataset.hpp"
#include "fomnav/evaluation.hpp"
#include "fomnav/image_io.hpp"
#include "fomnav/planning.hpp"
#include "fomnav/policy_spec.hpp"

using namespace fomnav;
using nlohmann::json;

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  double seg_noise = -1;  // < 0: keep the config value
  int width = 0, height = 0;
};

struct WorldSource {
  std::string file;
  std::optional<std::uint64_t> seed;
  int count = 1;
};

config::RunConfig load_config(const Globals& g) {
  config::RunConfig cfg;
  if (!g.config_path.empty()) {
    try {
      cfg = config::load(g.config_path);
    } catch (const LoadError& e) {
      throw UsageError(e.what());
    }
  }
  if (g.seg_noise >= 0) {
    if (g.seg_noise > 1) throw UsageError("--seg-noise must lie in [0, 1]");
    cfg.nav.noise.flip_probability = g.seg_noise;
  }
  if (g.width > 0) cfg.world.agent.width = g.width;
  if (g.height > 0) cfg.world.agent.height = g.height;
  return cfg;
}

/// World seeds (or a single file) with the seed each world is labelled by.
std::vector<std::pair<std::uint64_t, std::function<sim::WorldSpec()>>> worlds_of(const WorldSource& src,
                                                                                 const config::RunConfig& cfg) {
  if (!src.file.empty() && src.seed) throw UsageError("give either --world or --world-seed, not both");
  if (src.file.empty() && !src.seed) throw UsageError("a world source is required: --world FILE or --world-seed N");
  if (src.count < 1) throw UsageError("--worlds must be positive");
  std::vector<std::pair<std::uint64_t, std::function<sim::WorldSpec()>>> out;
  if (!src.file.empty()) {
    if (src.count != 1) throw UsageError("--worlds applies to procedural worlds only");
    const std::string path = src.file;
    out.emplace_back(0, [path] { return sim::load_world(path); });
    return out;
  }
  for (int i = 0; i < src.count; ++i) {
    const std::uint64_t s = *src.seed + static_cast<std::uint64_t>(i);
    const auto params = cfg.world;
    out.emplace_back(s, [s, params] { return sim::generate_world(s, params); });
  }
  return out;
}

std::uint64_t episode_seed(std::uint64_t global, std::uint64_t world_seed, int index) {
  return hash_combine(hash_combine(mix64(global), world_seed), static_cast<std::uint64_t>(index));
}

std::string episode_id(std::uint64_t world_seed, int index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "w%llu-e%03d", static_cast<unsigned long long>(world_seed), index);
  return buf;
}

/// Runs fn(i) for i in [0, n) on `jobs` threads; emit(i) is called in index
/// order as soon as every earlier index has finished.
void parallel_ordered(int n, int jobs, const std::function<void(int)>& fn, const std::function<void(int)>& emit) {
  jobs = std::max(1, std::min(jobs, n));
  std::atomic<int> next{0};
  std::mutex mu;
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  int emitted = 0;
  std::exception_ptr failure;
  auto worker = [&] {
    for (int i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
      std::lock_guard lock(mu);
      done[static_cast<std::size_t>(i)] = 1;
      while (!failure && emitted < n && done[static_cast<std::size_t>(emitted)]) emit(emitted++);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<dataset::Scene> prepare_scenes(const WorldSource& src, const config::RunConfig& cfg, int jobs) {
  auto worlds = worlds_of(src, cfg);
  std::vector<dataset::Scene> scenes(worlds.size());
  parallel_ordered(
      static_cast<int>(worlds.size()), jobs,
      [&](int i) { scenes[i] = dataset::prepare_scene(worlds[i].second(), worlds[i].first); }, [](int) {});
  return scenes;
}

struct PlannedEpisode {
  const dataset::Scene* scene;
  dataset::EpisodeSpec spec;
};

std::vector<PlannedEpisode> plan_episodes(const std::vector<dataset::Scene>& scenes, int per_world,
                                          std::uint64_t seed, int& skipped) {
  if (per_world < 1) throw UsageError("--episodes must be positive");
  std::vector<PlannedEpisode> out;
  skipped = 0;
  for (const auto& scene : scenes)
    for (int e = 0; e < per_world; ++e) {
      auto spec = dataset::sample_episode(scene, episode_seed(seed, scene.world_seed, e),
                                          episode_id(scene.world_seed, e));
      if (spec) {
        spec->world_seed = scene.world_seed;
        out.push_back({&scene, *spec});
      } else {
        ++skipped;
      }
    }
  return out;
}

std::string result_line(const evaluation::EpisodeResult& r) {
  char buf[256];
  const double s = r.d_G > 0 && std::isfinite(r.d_G) ? evaluation::spl(r) : 0.0;
  std::snprintf(buf, sizeof buf, "%-14s %-11s %-7s steps=%3d d_G=%6.2f d_T=%6.2f spl=%.3f %s", r.episode_id.c_str(),
                r.category.c_str(), r.success ? "success" : "fail", r.steps, r.d_G, r.d_T, s,
                evaluation::to_string(r.failure));
  return buf;
}

void print_report(const std::vector<evaluation::EpisodeResult>& results, bool as_json, int skipped) {
  if (results.empty()) {
    if (as_json)
      std::cout << json{{"episodes", 0}, {"skipped", skipped}}.dump(2) << "\n";
    else
      std::cout << "no episodes (" << skipped << " skipped)\n";
    return;
  }
  const auto report = evaluation::aggregate(results);
  if (as_json) {
    auto j = evaluation::report_to_json(report);
    j["skipped"] = skipped;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << evaluation::format_report(report);
    if (skipped) std::cout << "skipped: " << skipped << "\n";
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  return os;
}

// ---------------------------------------------------------------- run

struct RunOptions {
  WorldSource world;
  int episodes = 1;
  std::string policy = "oracle";
  int jobs = 1;
  bool json = false;
  int render_every = 0;
  std::string render_dir;
  std::string results;
  std::string trace;
};

int cmd_run(const Globals& g, const RunOptions& o) {
  const auto cfg = load_config(g);
  policy::PolicySpec pspec;
  try {
    pspec = policy::parse_policy_spec(o.policy);
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  if (o.render_every < 0) throw UsageError("--render-every must be non-negative");
  if (o.render_every > 0 && o.render_dir.empty()) throw UsageError("--render-every needs --render-dir");
  if (!o.render_dir.empty()) std::filesystem::create_directories(o.render_dir);

  const auto scenes = prepare_scenes(o.world, cfg, o.jobs);
  int skipped = 0;
  const auto planned = plan_episodes(scenes, o.episodes, g.seed, skipped);

  std::optional<std::ofstream> results_os, trace_os;
  if (!o.results.empty()) results_os = open_out(o.results);
  if (!o.trace.empty()) trace_os = open_out(o.trace);

  const int n = static_cast<int>(planned.size());
  std::vector<evaluation::EpisodeResult> results(static_cast<std::size_t>(n));
  std::vector<std::string> traces(static_cast<std::size_t>(n)), messages(static_cast<std::size_t>(n));
  int protocol_failures = 0;

  auto run_one = [&](int i) {
    const auto& [scene, spec] = planned[static_cast<std::size_t>(i)];
    auto pol = policy::make_policy(pspec, cfg.nav.embed_dim, cfg.nav.embed_seed);
    nav::FrameHook hook;
    if (o.render_every > 0) {
      hook = [&, id = spec.id](const nav::FrameInfo& f) {
        if (f.state.steps % o.render_every != 0) return;
        char name[32];
        std::snprintf(name, sizeof name, "_%04d", f.state.steps);
        const auto base = (std::filesystem::path(o.render_dir) / (id + name)).string();
        image::write_pgm(image::map_codes(f.map.grid), base + ".pgm");
        image::write_png(image::render_map(f.map, {f.state.position, f.plan, f.goal}), base + ".png");
      };
    }
    auto rollout = dataset::run_episode(*scene, spec, *pol, cfg.nav, pspec.privileged(), hook);
    results[static_cast<std::size_t>(i)] = rollout.result;
    if (rollout.log.abort_reason == "protocol_error") messages[static_cast<std::size_t>(i)] = rollout.log.abort_message;
    std::string& t = traces[static_cast<std::size_t>(i)];
    for (const auto& q : rollout.log.queries)
      t += json{{"episode", spec.id}, {"step", q.step}, {"kind", to_string(q.choice.kind)}, {"id", q.choice.id}}
               .dump() +
           "\n";
  };
  auto emit = [&](int i) {
    const auto& r = results[static_cast<std::size_t>(i)];
    if (!o.json) std::cout << result_line(r) << "\n" << std::flush;
    if (!messages[static_cast<std::size_t>(i)].empty()) {
      ++protocol_failures;
      std::cerr << r.episode_id << ": " << messages[static_cast<std::size_t>(i)] << "\n";
    }
    if (results_os) *results_os << evaluation::result_to_json(r).dump() << "\n";
    if (trace_os) *trace_os << traces[static_cast<std::size_t>(i)];
  };
  parallel_ordered(n, o.jobs, run_one, emit);

  print_report(results, o.json, skipped);
  if (results_os && !*results_os) throw Error("cannot write " + o.results);
  if (trace_os && !*trace_os) throw Error("cannot write " + o.trace);
  if (protocol_failures) {
    std::cerr << "error: " << protocol_failures << " episode(s) aborted on protocol errors\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------- gen-dataset

struct GenOptions {
  WorldSource world;
  int episodes = 1;
  int jobs = 1;
  std::string out;
};

int cmd_gen_dataset(const Globals& g, const GenOptions& o) {
  const auto cfg = load_config(g);
  const auto scenes = prepare_scenes(o.world, cfg, o.jobs);
  int skipped = 0;
  const auto planned = plan_episodes(scenes, o.episodes, g.seed, skipped);
  std::vector<dataset::Episode> episodes(planned.size());
  parallel_ordered(
      static_cast<int>(planned.size()), o.jobs,
      [&](int i) { episodes[i] = dataset::generate_episode(*planned[i].scene, planned[i].spec, cfg.nav); },
      [](int) {});
  dataset::write_dataset(episodes, o.out, skipped);
  std::cout << dataset::manifest(episodes, skipped).dump(2) << "\n";
  std::cout << "episodes: " << episodes.size() << "\nskipped: " << skipped << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& results_path, const std::string& dataset_dir, bool as_json) {
  if (results_path.empty() == dataset_dir.empty()) throw UsageError("give exactly one of --results or --dataset");
  std::vector<evaluation::EpisodeResult> results;
  if (!results_path.empty()) {
    std::ifstream is(results_path);
    if (!is) throw LoadError("cannot open " + results_path);
    std::string line;
    for (int lineno = 1; std::getline(is, line); ++lineno) {
      if (line.empty()) continue;
      try {
        results.push_back(evaluation::result_from_json(json::parse(line)));
      } catch (const std::exception& e) {
        throw LoadError(results_path + " line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  } else {
    for (const auto& ep : dataset::read_dataset(dataset_dir)) results.push_back(ep.outcome);
  }
  if (results.empty()) throw LoadError("no results to evaluate");
  print_report(results, as_json, 0);
  return 0;
}

// ---------------------------------------------------------------- render

struct RenderOptions {
  WorldSource world;
  std::string png, map, depth, field, save_world;
  std::string category;
  std::vector<double> pose;
  int scale = 4;
};

std::uint32_t category_color(int index) {
  static const std::uint32_t palette[] = {0xe6194b, 0x3cb44b, 0xffe119, 0x4363d8, 0xf58231,
                                          0x911eb4, 0x46f0f0, 0xf032e6, 0xbcf60c, 0x008080};
  return palette[static_cast<std::size_t>(index) % std::size(palette)];
}

image::Rgb world_image(const sim::WorldSpec& world, const sim::NavMap& nav, int scale) {
  const auto& s = nav.shape;
  image::Rgb img{s.cols * scale, s.rows * scale,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(s.cols) * s.rows * scale * scale * 3, 255)};
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < s.cols; ++c) {
      const geometry::Vec2 p = s.center_of({r, c});
      std::uint32_t rgb = nav.free({r, c}) ? 0xffffff : 0xd0d0d0;
      for (const auto& w : world.walls)
        if (sim::footprint_distance(w, p) == 0) rgb = 0x303030;
      for (const auto& obj : world.objects)
        if (sim::footprint_distance(obj.box, p) == 0) rgb = category_color(world.category_index(obj.category));
      for (int dy = 0; dy < scale; ++dy)
        for (int dx = 0; dx < scale; ++dx) img.set(c * scale + dx, (s.rows - 1 - r) * scale + dy, rgb);
    }
  return img;
}

int cmd_render(const Globals& g, const RenderOptions& o) {
  const auto cfg = load_config(g);
  auto worlds = worlds_of(o.world, cfg);
  if (worlds.size() != 1) throw UsageError("render takes a single world");
  if (o.png.empty() && o.map.empty() && o.depth.empty() && o.field.empty() && o.save_world.empty())
    throw UsageError("nothing to render: give --png, --map, --depth, --field or --save-world");
  if (!o.depth.empty() && o.pose.size() != 3) throw UsageError("--depth needs --pose X,Y,HEADING");
  if (!o.field.empty() && o.category.empty()) throw UsageError("--field needs --category");

  const auto world = worlds.front().second();
  if (!o.save_world.empty()) sim::save_world(world, o.save_world);
  const auto nav = sim::gt_navigability(world, cfg.nav.mapping.resolution);
  if (!o.png.empty()) image::write_png(world_image(world, nav, std::max(1, o.scale)), o.png);
  if (!o.map.empty()) {
    image::Gray img{nav.shape.cols, nav.shape.rows, std::vector<std::uint8_t>(nav.shape.size())};
    for (int r = 0; r < nav.shape.rows; ++r)
      for (int c = 0; c < nav.shape.cols; ++c)
        img.data[static_cast<std::size_t>(nav.shape.rows - 1 - r) * img.width + c] =
            nav.free({r, c}) ? image::kFreeCode : image::kObstacleCode;
    image::write_pgm(img, o.map);
  }
  if (!o.depth.empty()) {
    sim::AgentState st;
    st.position = {o.pose[0], o.pose[1]};
    st.heading_deg = o.pose[2];
    const auto obs = sim::render(world, st);
    image::Gray img{obs.depth.width, obs.depth.height, std::vector<std::uint8_t>(obs.depth.data.size())};
    for (std::size_t i = 0; i < obs.depth.data.size(); ++i)
      img.data[i] = static_cast<std::uint8_t>(
          std::lround(255 * std::clamp(obs.depth.data[i] / world.agent.max_range, 0.0, 1.0)));
    image::write_pgm(img, o.depth);
  }
  if (!o.field.empty()) {
    const auto scene = dataset::prepare_scene(world, worlds.front().first);
    const auto it = scene.stop_fields.find(o.category);
    if (it == scene.stop_fields.end())
      throw UsageError("category '" + o.category + "' has no reachable viewpoints in this world");
    image::write_pgm(image::field_image(it->second), o.field);
  }
  return 0;
}

// ---------------------------------------------------------------- bench

struct Timing {
  std::string name;
  std::vector<double> ms;
};

template <class F>
Timing time_it(const std::string& name, int repeats, F&& f) {
  Timing t{name, {}};
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    t.ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return t;
}

int cmd_bench(const Globals& g, int grid, int repeats, bool as_json) {
  if (grid < 8) throw UsageError("--grid must be at least 8");
  if (repeats < 2) throw UsageError("--repeats must be at least 2");
  const auto cfg = load_config(g);
  Rng rng(g.seed);

  GridShape shape;
  shape.resolution = cfg.nav.mapping.resolution;
  shape.rows = shape.cols = grid;
  std::vector<std::uint8_t> blocked(shape.size());
  for (auto& b : blocked) b = rng.uniform() < 0.3;
  const Cell src{grid / 2, grid / 2};
  blocked[shape.index(src)] = 0;
  const Cell goal[] = {src};

  std::vector<Timing> rows;
  DistanceField field;
  rows.push_back(time_it("fmm_field", repeats, [&] { field = planning::fmm_field(shape, blocked, goal); }));
  // Plan from the farthest reachable cell.
  std::size_t far = shape.index(src);
  for (std::size_t i = 0; i < field.values.size(); ++i)
    if (std::isfinite(field.values[i]) && field.values[i] > field.values[far]) far = i;
  rows.push_back(time_it("astar_plan", repeats, [&] { planning::astar_plan(shape, blocked, shape.cell_at(far), field); }));

  const auto world = sim::generate_world(g.seed, cfg.world);
  sim::AgentState st;
  st.position = 0.5 * (world.bounds_min + world.bounds_max);
  for (int k = 0; k < 64 && sim::collides(world, st.position); ++k)
    st.position = {rng.uniform(world.bounds_min.x(), world.bounds_max.x()),
                   rng.uniform(world.bounds_min.y(), world.bounds_max.y())};
  const auto obs = sim::render(world, st);
  auto mcfg = cfg.nav.mapping;
  mcfg.extent = grid * mcfg.resolution;
  rows.push_back(time_it("integrate_observation", repeats, [&] {
    auto map = mapping::FrontierObjectMap::create(mcfg, st.position);
    mapping::integrate_observation(map, obs.depth, obs.intrinsics, obs.pose);
  }));

  json out = json::array();
  for (const auto& t : rows) {
    const double mean = std::accumulate(t.ms.begin(), t.ms.end(), 0.0) / t.ms.size();
    double var = 0;
    for (double v : t.ms) var += (v - mean) * (v - mean);
    var /= (t.ms.size() - 1);
    out.push_back({{"name", t.name},
                   {"grid", grid},
                   {"repeats", repeats},
                   {"mean_ms", mean},
                   {"stddev_ms", std::sqrt(var)},
                   {"variance_ms2", var},
                   {"min_ms", *std::min_element(t.ms.begin(), t.ms.end())},
                   {"max_ms", *std::max_element(t.ms.begin(), t.ms.end())}});
  }
  if (as_json) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::printf("%-22s %6s %10s %10s %10s %10s\n", "benchmark", "grid", "mean_ms", "stddev_ms", "min_ms", "max_ms");
    for (const auto& r : out)
      std::printf("%-22s %6d %10.3f %10.3f %10.3f %10.3f\n", r["name"].get<std::string>().c_str(), grid,
                  r["mean_ms"].get<double>(), r["stddev_ms"].get<double>(), r["min_ms"].get<double>(),
                  r["max_ms"].get<double>());
  }
  return 0;
}

void add_world_options(CLI::App* cmd, WorldSource& w, bool many) {
  cmd->add_option("--world", w.file, "World JSON file (fomworld/1)");
  cmd->add_option("--world-seed", w.seed, "Seed of the first procedural world");
  if (many) cmd->add_option("--worlds", w.count, "Number of procedural worlds, seeds N, N+1, ...");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frontier/object map navigation: rollouts, datasets, evaluation and renders."};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config document applied over the defaults")
      ->envname(config::kConfigEnv);
  app.add_option("--seed", g.seed, "Seed for episode sampling and every random choice");
  app.add_option("--seg-noise", g.seg_noise, "Label flip probability of the segmentation masks");
  app.add_option("--width", g.width, "Camera image width in pixels");
  app.add_option("--height", g.height, "Camera image height in pixels");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run episodes with a policy and print the report");
  add_world_options(run_cmd, run.world, true);
  run_cmd->add_option("--episodes", run.episodes, "Episodes per world");
  run_cmd->add_option("--policy", run.policy,
                      "oracle | nearest-frontier | head:<weights file> | extern:<command or host:port>");
  run_cmd->add_option("--jobs", run.jobs, "Parallel episodes");
  run_cmd->add_flag("--json", run.json, "Print the report as JSON");
  run_cmd->add_option("--render-every", run.render_every, "Write a PGM and PNG map frame every N steps");
  run_cmd->add_option("--render-dir", run.render_dir, "Directory for map frames");
  run_cmd->add_option("--results", run.results, "Write per-episode results as JSON lines");
  run_cmd->add_option("--trace", run.trace, "Write every policy decision as JSON lines");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-dataset", "Record oracle rollouts as a training dataset");
  add_world_options(gen_cmd, gen.world, true);
  gen_cmd->add_option("--episodes", gen.episodes, "Episodes per world");
  gen_cmd->add_option("--jobs", gen.jobs, "Parallel episodes");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  std::string eval_results, eval_dataset;
  bool eval_json = false;
  auto* eval_cmd = app.add_subcommand("eval", "Aggregate stored results into a report");
  eval_cmd->add_option("--results", eval_results, "JSON lines written by run --results");
  eval_cmd->add_option("--dataset", eval_dataset, "Dataset directory written by gen-dataset");
  eval_cmd->add_flag("--json", eval_json, "Print the report as JSON");

  RenderOptions rend;
  auto* render_cmd = app.add_subcommand("render", "Export world images, depth frames and distance fields");
  add_world_options(render_cmd, rend.world, false);
  render_cmd->add_option("--png", rend.png, "Top-down color image of the world");
  render_cmd->add_option("--map", rend.map, "Ground-truth navigability PGM (0 blocked, 255 free)");
  render_cmd->add_option("--depth", rend.depth, "Depth PGM from --pose, scaled to max range");
  render_cmd->add_option("--pose", rend.pose, "Agent pose X,Y,HEADING_DEG for --depth")->delimiter(',');
  render_cmd->add_option("--field", rend.field, "Geodesic distance field PGM to the --category viewpoints");
  render_cmd->add_option("--category", rend.category, "Target category for --field");
  render_cmd->add_option("--scale", rend.scale, "Pixels per cell for --png");
  render_cmd->add_option("--save-world", rend.save_world, "Write the world as JSON");

  int bench_grid = 128, bench_repeats = 5;
  bool bench_json = false;
  auto* bench_cmd = app.add_subcommand("bench", "Time the planners and map integration");
  bench_cmd->add_option("--grid", bench_grid, "Grid side length in cells");
  bench_cmd->add_option("--repeats", bench_repeats, "Repetitions per benchmark");
  bench_cmd->add_flag("--json", bench_json, "Print rows as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return cmd_run(g, run);
    if (*gen_cmd) return cmd_gen_dataset(g, gen);
    if (*eval_cmd) return cmd_eval(eval_results, eval_dataset, eval_json);
    if (*render_cmd) return cmd_render(g, rend);
    if (*bench_cmd) return cmd_bench(g, bench_grid, bench_repeats, bench_json);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
