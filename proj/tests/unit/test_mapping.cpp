#include <doctest.h>

#include <algorithm>
#include <set>

#include "fomnav/mapping.hpp"
#include "fomnav/simulator.hpp"
#include "oracles.hpp"

using namespace fomnav;
using namespace fomnav::mapping;

namespace {

sim::AgentConfig small_agent() {
  sim::AgentConfig a;
  a.width = 160;
  a.height = 120;
  return a;
}

sim::WorldSpec wall_world(double wall_x) {
  sim::WorldSpec w;
  w.categories = {"chair"};
  w.bounds_min = {-3, -3};
  w.bounds_max = {wall_x + 0.1, 3};
  w.walls.push_back({{wall_x, -3, 0}, {wall_x + 0.1, 3, 2.5}});
  w.agent = small_agent();
  return w;
}

FrontierObjectMap observe(const sim::WorldSpec& w, const sim::AgentState& st, FrontierObjectMap map) {
  const auto obs = sim::render(w, st);
  integrate_observation(map, obs.depth, obs.intrinsics, obs.pose);
  return map;
}

OccupancyGrid grid_from(const oracle::RawGrid& raw) {
  OccupancyGrid g(raw.shape, raw.inflation);
  for (int r = 0; r < raw.shape.rows; ++r)
    for (int c = 0; c < raw.shape.cols; ++c) {
      const int s = raw.state[r * raw.shape.cols + c];
      if (s == 1) g.set_explored({r, c});
      if (s == 2) g.set_obstacle({r, c});
    }
  return g;
}

oracle::RawGrid random_raw(Rng& rng, int n) {
  oracle::RawGrid raw;
  raw.shape.rows = raw.shape.cols = n;
  raw.shape.resolution = 0.05;
  raw.inflation = 0.05 * rng.uniform_int(0, 2);
  raw.state.assign(static_cast<std::size_t>(n) * n, 0);
  // Explored blobs carved by random discs, with sparse obstacles.
  const int discs = rng.uniform_int(1, 6);
  for (int k = 0; k < discs; ++k) {
    const int cr = rng.uniform_int(0, n - 1), cc = rng.uniform_int(0, n - 1), rad = rng.uniform_int(2, n / 3);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= rad * rad) raw.state[r * n + c] = 1;
  }
  for (auto& s : raw.state)
    if (rng.uniform() < 0.03) s = 2;
  return raw;
}

}  // namespace

TEST_SUITE("mapping") {
  TEST_CASE("wall one meter ahead") {
    const auto w = wall_world(1.0);
    MappingConfig cfg;
    cfg.extent = 8.0;
    const auto map = observe(w, {{0, 0}, 0.0}, FrontierObjectMap::create(cfg, {0, 0}));
    const auto& g = map.grid;
    const auto& s = g.shape();
    // Obstacle line at x ~ 1.0 along the view axis, free before, unknown beyond.
    CHECK((g.is_obstacle(s.cell_of({1.01, 0.0})) || g.is_obstacle(s.cell_of({0.99, 0.0}))));
    for (double x = 0.1; x < 0.9; x += 0.05) CHECK(g.state(s.cell_of({x, 0.0})) == CellState::FreeExplored);
    for (double x = 1.15; x < 3; x += 0.05) CHECK(g.state(s.cell_of({x, 0.0})) == CellState::Unknown);
    // Behind the agent nothing is known.
    CHECK(g.state(s.cell_of({-0.5, 0.0})) == CellState::Unknown);
    // Every obstacle cell is a wall cell of the synthetic world.
    for (int r = 0; r < s.rows; ++r)
      for (int c = 0; c < s.cols; ++c)
        if (g.is_obstacle({r, c})) {
          const Vec2 p = s.center_of({r, c});
          CHECK(p.x() >= 1.0 - s.resolution);
          CHECK(p.x() <= 1.1 + s.resolution);
        }
  }

  TEST_CASE("empty space at max range gives a free wedge") {
    const auto k = geometry::CameraIntrinsics::from_hfov(160, 120, 79, 5.0);
    geometry::DepthImage d(160, 120, k.max_range);
    MappingConfig cfg;
    cfg.extent = 12;
    auto map = FrontierObjectMap::create(cfg, {0, 0});
    const auto pose = geometry::Pose::from_agent(0, 0, 0, 0.88);
    CHECK(integrate_observation(map, d, k, pose) == 0);
    const auto& g = map.grid;
    const auto& s = g.shape();
    CHECK(g.explored_free_count() > 0);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK_FALSE(g.obstacle_mask()[i]);
    CHECK(g.is_explored(s.cell_of({4.5, 0})));
    CHECK(g.is_explored(s.cell_of({3.0, 1.0})));
    CHECK_FALSE(g.is_explored(s.cell_of({3.0, 3.0})));  // outside the 79 degree wedge
    CHECK_FALSE(g.is_explored(s.cell_of({-1.0, 0})));
    CHECK_FALSE(g.is_explored(s.cell_of({5.2, 0})));
  }

  TEST_CASE("re-observing leaves the grid unchanged") {
    const auto w = wall_world(1.5);
    MappingConfig cfg;
    cfg.extent = 8.0;
    const auto once = observe(w, {{0, 0.2}, 30.0}, FrontierObjectMap::create(cfg, {0, 0}));
    const auto twice = observe(w, {{0, 0.2}, 30.0}, once);
    CHECK(std::ranges::equal(once.grid.obstacle_mask(), twice.grid.obstacle_mask()));
    CHECK(std::ranges::equal(once.grid.explored_mask(), twice.grid.explored_mask()));
    CHECK(std::ranges::equal(once.grid.inflated_mask(), twice.grid.inflated_mask()));
    CHECK(once.scene.size() == twice.scene.size());
  }

  TEST_CASE("explored area is monotone and obstacles are inflated") {
    const auto w = wall_world(1.2);
    MappingConfig cfg;
    cfg.extent = 8.0;
    auto map = FrontierObjectMap::create(cfg, {0, 0});
    std::size_t prev = 0;
    for (int k = 0; k < 12; ++k) {
      map = observe(w, {{-0.5, 0.3}, 30.0 * k}, map);
      std::size_t explored = 0;
      for (auto v : map.grid.explored_mask()) explored += v;
      CHECK(explored >= prev);
      prev = explored;
    }
    const auto& g = map.grid;
    for (std::size_t i = 0; i < g.shape().size(); ++i)
      if (g.obstacle_mask()[i]) CHECK(g.inflated_mask()[i]);
  }

  TEST_CASE("frontiers: fully explored grid") {
    oracle::RawGrid raw;
    raw.shape.rows = raw.shape.cols = 10;
    raw.state.assign(100, 1);
    CHECK(extract_frontiers(grid_from(raw), 4).empty());
  }

  TEST_CASE("frontiers: half explored grid") {
    oracle::RawGrid raw;
    raw.shape.rows = raw.shape.cols = 10;
    raw.state.assign(100, 0);
    for (int r = 0; r < 10; ++r)
      for (int c = 0; c < 5; ++c) raw.state[r * 10 + c] = 1;
    const auto fs = extract_frontiers(grid_from(raw), 4);
    REQUIRE(fs.size() == 1);
    REQUIRE(fs[0].cells.size() == 10);
    for (const auto& c : fs[0].cells) CHECK(c.col == 4);
    CHECK(fs[0].center.col == 4);
    CHECK((fs[0].center.row == 4 || fs[0].center.row == 5));
    CHECK(std::min(fs[0].end1.row, fs[0].end2.row) == 0);
    CHECK(std::max(fs[0].end1.row, fs[0].end2.row) == 9);
  }

  TEST_CASE("frontiers: two openings in a wall") {
    oracle::RawGrid raw;
    raw.shape.rows = 20;
    raw.shape.cols = 20;
    raw.state.assign(400, 0);
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 10; ++c) raw.state[r * 20 + c] = 1;
    // Wall column 9 with two gaps; everything else on the boundary is blocked.
    for (int r = 0; r < 20; ++r)
      if (!(r >= 3 && r <= 7) && !(r >= 12 && r <= 17)) raw.state[r * 20 + 9] = 2;
    const auto fs = extract_frontiers(grid_from(raw), 4);
    const auto want = oracle::frontier_components(raw, 4);
    REQUIRE(want.size() == 2);
    REQUIRE(fs.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      auto got = fs[i].cells;
      std::sort(got.begin(), got.end());
      CHECK(got == want[i]);
    }
  }

  TEST_CASE("frontier extraction equals classify-then-components on random grids") {
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
      const auto raw = random_raw(rng, 30);
      const auto g = grid_from(raw);
      const auto fs = extract_frontiers(g, 4);
      const auto want = oracle::frontier_components(raw, 4);
      REQUIRE(fs.size() == want.size());
      for (std::size_t i = 0; i < fs.size(); ++i) {
        auto got = fs[i].cells;
        std::sort(got.begin(), got.end());
        CHECK(got == want[i]);
        const std::set<Cell> cells(got.begin(), got.end());
        CHECK(cells.count(fs[i].center));
        CHECK(cells.count(fs[i].end1));
        CHECK(cells.count(fs[i].end2));
        for (const auto& c : got) CHECK(is_frontier_cell(g, c));
      }
    }
  }

  TEST_CASE("frontier pixel mask") {
    const auto k = geometry::CameraIntrinsics::from_hfov(160, 120, 79, 5.0);
    const auto pose = geometry::Pose::from_agent(0, 0, 0, 0.88);
    const std::vector<Vec2> line = {{2.0, -0.3}, {2.0, 0.0}, {2.0, 0.3}};
    const auto m = frontier_pixel_mask(line, k, pose, 0.88, 0.5);
    REQUIRE(m);
    CHECK(m->u0 < k.cx);
    CHECK(m->u1 > k.cx);
    // Left end (y = +0.3) projects to u = cx - fx * 0.3 / 2.
    CHECK(std::abs(m->u0 - (k.cx - k.fx * 0.15)) <= 1.0);
    CHECK(std::abs(m->u1 - (k.cx + k.fx * 0.15)) <= 1.0);
    // Ground at v = cy + fy * 0.88 / 2, top (1.38 m) at v = cy - fy * 0.5 / 2.
    CHECK(std::abs(m->v1 - std::min(119.0, k.cy + k.fy * 0.44)) <= 1.0);
    CHECK(std::abs(m->v0 - (k.cy - k.fy * 0.25)) <= 1.0);

    const std::vector<Vec2> behind = {{-2.0, -0.3}, {-2.0, 0.3}};
    CHECK_FALSE(frontier_pixel_mask(behind, k, pose, 0.88, 0.5));

    const std::vector<Vec2> partial = {{2.0, 0.0}, {2.0, -5.0}};
    const auto p = frontier_pixel_mask(partial, k, pose, 0.88, 0.5);
    REQUIRE(p);
    CHECK(p->u1 == k.width - 1);
    CHECK(std::abs(p->u0 - k.cx) <= 1.0);
  }

  TEST_CASE("frontier reconciliation") {
    GridShape s;
    s.rows = s.cols = 40;
    auto make = [](int row, int c0, int c1) {
      FrontierGeometry g;
      for (int c = c0; c <= c1; ++c) g.cells.push_back({row, c});
      g.end1 = g.cells.front();
      g.end2 = g.cells.back();
      g.center = g.cells[g.cells.size() / 2];
      return g;
    };
    int next_id = 0, feature_calls = 0;
    FeatureFn feat = [&](const FrontierGeometry&) {
      ++feature_calls;
      return std::vector<double>{double(feature_calls)};
    };
    const std::vector<FrontierGeometry> first = {make(5, 0, 9), make(20, 0, 19)};
    const auto a = reconcile_frontiers({}, first, s, 0, next_id, feat);
    REQUIRE(a.size() == 2);
    CHECK(a[0].id == 0);
    CHECK(a[1].id == 1);

    // Unchanged grid.
    const auto same = reconcile_frontiers(a, first, s, 1, next_id, feat);
    REQUIRE(same.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(same[i].id == a[i].id);
      CHECK(same[i].birth_step == 0);
      CHECK(same[i].feature == a[i].feature);
    }

    // Second frontier shrinks by 30%; first one is consumed; a new one appears.
    const std::vector<FrontierGeometry> later = {make(20, 0, 13), make(30, 0, 5)};
    const auto b = reconcile_frontiers(same, later, s, 2, next_id, feat);
    REQUIRE(b.size() == 2);
    CHECK(b[0].id == 1);
    CHECK(b[0].birth_step == 0);
    CHECK(b[0].feature == a[1].feature);
    CHECK(b[1].id == 2);
    CHECK(b[1].birth_step == 2);

    // Retired ids are never handed out again.
    const std::vector<FrontierGeometry> again = {make(5, 0, 9)};
    const auto c = reconcile_frontiers(b, again, s, 3, next_id, feat);
    REQUIRE(c.size() == 1);
    CHECK(c[0].id == 3);
  }
}
