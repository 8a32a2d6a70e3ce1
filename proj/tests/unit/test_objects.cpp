#include <doctest.h>

#include <algorithm>

#include "fomnav/objects.hpp"
#include "fomnav/simulator.hpp"
#include "oracles.hpp"

using namespace fomnav;
using namespace fomnav::objects;

namespace {

PointCloud line_cloud(double x0, double x1, double step, double weight = 1.0) {
  PointCloud c;
  const int n = static_cast<int>(std::lround((x1 - x0) / step));
  for (int i = 0; i <= n; ++i) {
    c.points.push_back({x0 + i * step, 0.0, 0.5});
    c.weights.push_back(weight);
  }
  return c;
}

PointCloud random_cloud(Rng& rng, int n, const Vec3& lo, const Vec3& hi) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.points.push_back({rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()), rng.uniform(lo.z(), hi.z())});
  return c;
}

std::vector<std::uint8_t> as_bytes(std::span<const std::uint8_t> s) { return {s.begin(), s.end()}; }

DistanceField oracle_field(const OccupancyGrid& g, const Cell& from) {
  const auto blocked = as_bytes(g.inflated_mask());
  DistanceField f;
  f.shape = g.shape();
  f.values = oracle::dijkstra(g.shape(), blocked, {from}).dist;
  f.sources = {from};
  return f;
}

OccupancyGrid explored_grid(int n, double inflation) {
  GridShape s;
  s.rows = s.cols = n;
  OccupancyGrid g(s, inflation);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) g.set_explored({r, c});
  return g;
}

}  // namespace

TEST_SUITE("objects") {
  TEST_CASE("overlap ratio examples") {
    const auto a = line_cloud(0, 0.9, 0.1);
    CHECK(overlap_ratio(a, a, 0.03) == std::pair{1.0, 1.0});
    PointCloud far = a;
    for (auto& p : far.points) p.x() += 10;
    CHECK(overlap_ratio(a, far, 0.03) == std::pair{0.0, 0.0});
    PointCloud six;
    six.points.assign(a.points.begin(), a.points.begin() + 6);
    const auto [ra, rb] = overlap_ratio(a, six, 0.03);
    CHECK(ra == doctest::Approx(0.6));
    CHECK(rb == doctest::Approx(1.0));
    CHECK_THROWS_AS(overlap_ratio(PointCloud{}, a, 0.03), InvalidInput);
    CHECK_THROWS_AS(overlap_ratio(a, PointCloud{}, 0.03), InvalidInput);
    CHECK_THROWS_AS(overlap_ratio(a, a, 0.0), InvalidInput);
  }

  TEST_CASE("overlap ratio uses a strict distance test") {
    PointCloud a{{{0, 0, 0}}, {}}, b{{{0.03, 0, 0}}, {}};
    CHECK(overlap_ratio(a, b, 0.03).first == oracle::overlap_fraction(a.points, b.points, 0.03));
  }

  TEST_CASE("overlap ratio matches brute force on random clouds") {
    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
      const auto a = random_cloud(rng, 200, {0, 0, 0}, {0.5, 0.5, 0.5});
      const auto b = random_cloud(rng, 150, {0.25, 0, 0}, {0.75, 0.5, 0.5});
      const double delta = rng.uniform(0.01, 0.08);
      const auto [ra, rb] = overlap_ratio(a, b, delta);
      CHECK(ra == doctest::Approx(oracle::overlap_fraction(a.points, b.points, delta)));
      CHECK(rb == doctest::Approx(oracle::overlap_fraction(b.points, a.points, delta)));
    }
  }

  TEST_CASE("single point candidate has a degenerate box") {
    const auto c = make_candidate(PointCloud{{{1, 2, 3}}, {}}, {1.0}, {});
    CHECK(c.bbox_min == Vec3(1, 2, 3));
    CHECK(c.bbox_max == Vec3(1, 2, 3));
    for (const auto& k : c.bbox_corners) CHECK(k == Vec3(1, 2, 3));
    CHECK(c.weight == 1.0);
    CHECK(c.center == Vec3(1, 2, 3));
  }

  TEST_CASE("merging an identical candidate") {
    ObjectConfig cfg;
    ObjectStore store;
    const auto c = make_candidate(line_cloud(0.01, 0.51, 0.05), {0.0, 1.0}, {1.0, 2.0});
    CHECK(merge_step(store, c, cfg) == 0);
    CHECK(merge_step(store, c, cfg) == 0);
    REQUIRE(store.objects.size() == 1);
    CHECK(store.objects[0].weight == doctest::Approx(2 * c.weight));
    CHECK(store.objects[0].cloud.size() == c.cloud.size());
    CHECK(store.objects[0].category_dist == std::vector<double>{0.0, 1.0});
    CHECK(store.objects[0].feature[1] == doctest::Approx(2.0));
  }

  TEST_CASE("merged labels are weight averaged") {
    ObjectConfig cfg;
    ObjectStore store;
    merge_step(store, make_candidate(line_cloud(0.01, 0.51, 0.05, 1.0), {1.0, 0.0}, {4.0}), cfg);
    merge_step(store, make_candidate(line_cloud(0.01, 0.51, 0.05, 3.0), {0.0, 1.0}, {0.0}), cfg);
    REQUIRE(store.objects.size() == 1);
    CHECK(store.objects[0].category_dist[0] == doctest::Approx(0.25));
    CHECK(store.objects[0].category_dist[1] == doctest::Approx(0.75));
    CHECK(store.objects[0].feature[0] == doctest::Approx(1.0));
    CHECK(store.objects[0].top_category() == 1);
  }

  TEST_CASE("an empty candidate is rejected") {
    ObjectStore store;
    CHECK_THROWS_AS(merge_step(store, ObjectInstance{}, ObjectConfig{}), InvalidInput);
  }

  TEST_CASE("a bridging candidate chains two objects together") {
    ObjectConfig cfg;
    ObjectStore store;
    const auto a = make_candidate(line_cloud(0.01, 0.51, 0.05), {1.0, 0.0}, {});
    const auto b = make_candidate(line_cloud(1.01, 1.51, 0.05), {1.0, 0.0}, {});
    const auto bridge = make_candidate(line_cloud(0.01, 1.51, 0.05), {1.0, 0.0}, {});
    CHECK(merge_step(store, a, cfg) == 0);
    CHECK(merge_step(store, b, cfg) == 1);
    REQUIRE(store.objects.size() == 2);
    CHECK(merge_step(store, bridge, cfg) == 0);
    REQUIRE(store.objects.size() == 1);
    CHECK(store.objects[0].weight == doctest::Approx(a.weight + b.weight + bridge.weight));
    CHECK(store.objects[0].bbox_min.x() == doctest::Approx(0.01));
    CHECK(store.objects[0].bbox_max.x() == doctest::Approx(1.51));
    CHECK(store.next_id == 2);
  }

  TEST_CASE("random merge sequences end at a fixpoint and conserve weight") {
    Rng rng(31);
    ObjectConfig cfg;
    for (int trial = 0; trial < 10; ++trial) {
      ObjectStore store;
      double total = 0;
      for (int k = 0; k < 25; ++k) {
        const Vec3 lo(rng.uniform(0, 3), rng.uniform(0, 3), 0);
        const auto c = make_candidate(random_cloud(rng, 80, lo, lo + Vec3(0.3, 0.3, 0.3)), {1.0}, {});
        total += c.weight;
        const int id = merge_step(store, c, cfg);
        CHECK(store.find(id) != nullptr);
      }
      double sum = 0;
      for (const auto& o : store.objects) sum += o.weight;
      CHECK(sum == doctest::Approx(total));
      for (std::size_t i = 0; i < store.objects.size(); ++i)
        for (std::size_t j = i + 1; j < store.objects.size(); ++j) {
          const auto& p = store.objects[i].cloud.points;
          const auto& q = store.objects[j].cloud.points;
          CHECK(std::max(oracle::overlap_fraction(p, q, cfg.merge_delta),
                         oracle::overlap_fraction(q, p, cfg.merge_delta)) <= cfg.merge_ratio);
          CHECK(store.objects[i].id != store.objects[j].id);
        }
    }
  }

  TEST_CASE("mask filters") {
    ObjectConfig cfg;
    SegmentMask m;
    m.category_dist = {1.0};
    for (int i = 0; i < 50; ++i) m.pixels.push_back(240 * 640 + 300 + i);
    CHECK_FALSE(mask_accepted(m, 640, 480, cfg));
    for (int i = 0; i < 100; ++i) m.pixels.push_back(241 * 640 + 300 + i);
    CHECK(mask_accepted(m, 640, 480, cfg));
    m.pixels.push_back(10 * 640 + 300);  // inside the top border
    CHECK_FALSE(mask_accepted(m, 640, 480, cfg));
    m.pixels.back() = 240 * 640 + 630;  // inside the right border
    CHECK_FALSE(mask_accepted(m, 640, 480, cfg));

    const auto small = cfg.scaled_to(160, 120);
    CHECK(small.min_mask_pixels == 6);
    CHECK(small.border_top_bottom == 8);
    CHECK(small.border_left_right == 5);
  }

  TEST_CASE("ingesting a rendered box") {
    sim::WorldSpec w;
    w.categories = {"chair", "bed"};
    w.bounds_min = {-3, -3};
    w.bounds_max = {4, 3};
    w.objects.push_back({0, "bed", {{2.5, -0.25, 0}, {3.0, 0.25, 0.6}}});
    w.agent.width = 160;
    w.agent.height = 120;
    const auto obs = sim::render(w, {{0, 0}, 0.0});
    Rng rng(1);
    const auto masks = sim::gt_segments(w, obs, {}, rng);
    REQUIRE(masks.size() == 1);
    const auto cfg = ObjectConfig{}.scaled_to(160, 120);
    const auto cands = ingest_segments(masks, obs.depth, obs.intrinsics, obs.pose, cfg);
    REQUIRE(cands.size() == 1);
    const auto& c = cands[0];
    CHECK(c.top_category() == 1);
    CHECK(c.bbox_min.x() >= 2.5 - cfg.voxel);
    CHECK(c.bbox_max.x() <= 3.0 + cfg.voxel);
    CHECK(c.bbox_min.y() >= -0.25 - cfg.voxel);
    CHECK(c.bbox_max.y() <= 0.25 + cfg.voxel);
    CHECK(c.bbox_max.z() <= 0.6 + cfg.voxel);
    CHECK(c.bbox_max.z() > 0.4);
    CHECK(c.weight > 0);
  }

  TEST_CASE("footprint is the ground rectangle of the cloud") {
    GridShape s;
    s.rows = s.cols = 40;
    PointCloud c{{{0.31, 0.41, 0.2}, {0.59, 0.52, 0.7}}, {}};
    const auto cells = footprint_cells(make_candidate(c, {1.0}, {}), s);
    CHECK(cells.size() == 6 * 3);  // cols 6..11, rows 8..10
    for (const auto& k : cells) {
      CHECK(k.col >= 6);
      CHECK(k.col <= 11);
      CHECK(k.row >= 8);
      CHECK(k.row <= 10);
    }
  }

  TEST_CASE("geodesic distance of an object in a sealed room is infinite") {
    auto g = explored_grid(60, 0.1);
    // Ring of obstacles around [20, 40]^2 with the object inside.
    for (int i = 20; i <= 40; ++i) {
      g.set_obstacle({20, i});
      g.set_obstacle({40, i});
      g.set_obstacle({i, 20});
      g.set_obstacle({i, 40});
    }
    ObjectStore store;
    const Vec2 o = g.shape().center_of({30, 30});
    store.objects.push_back(make_candidate(PointCloud{{{o.x(), o.y(), 0.3}}, {}}, {1.0}, {}));
    refresh_object_geometry(store, g, CollisionMap(g.shape()), oracle_field(g, {5, 5}));
    CHECK(store.objects[0].geodesic_dist == kInf);
  }

  TEST_CASE("geodesic distance around a wall agrees with Dijkstra") {
    auto g = explored_grid(60, 0.1);
    // Wall across the middle with a gap on the right; object just below the wall.
    for (int c = 0; c < 50; ++c) g.set_obstacle({30, c});
    ObjectStore store;
    for (int c = 10; c <= 14; ++c) g.set_obstacle({20, c});
    PointCloud cloud;
    for (int c = 10; c <= 14; ++c) {
      const Vec2 p = g.shape().center_of({20, c});
      cloud.points.push_back({p.x(), p.y(), 0.4});
    }
    store.objects.push_back(make_candidate(cloud, {1.0}, {}));
    const Cell agent{45, 12};
    const auto field = oracle_field(g, agent);
    refresh_object_geometry(store, g, CollisionMap(g.shape()), field);
    // Reference: nearest navigable cell in the ring just outside the
    // inflated object footprint.
    const int ring = static_cast<int>(std::ceil(0.1 / 0.05)) + 1;
    double want = kInf;
    for (int r = 20 - ring; r <= 20 + ring; ++r)
      for (int c = 10 - ring; c <= 14 + ring; ++c)
        if (!g.is_inflated({r, c})) want = std::min(want, field.at({r, c}));
    REQUIRE(std::isfinite(want));
    CHECK(std::abs(store.objects[0].geodesic_dist - want) <= 0.05 + 1e-9);
    // The wall forces a detour, so the distance exceeds the straight line.
    CHECK(store.objects[0].geodesic_dist > 1.2);
  }
}
