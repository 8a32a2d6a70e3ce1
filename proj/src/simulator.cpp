#include "fomnav/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace fomnav::sim {

using nlohmann::json;

double footprint_distance(const Box& b, const Vec2& p) {
  const double dx = std::max({b.min.x() - p.x(), 0.0, p.x() - b.max.x()});
  const double dy = std::max({b.min.y() - p.y(), 0.0, p.y() - b.max.y()});
  return std::hypot(dx, dy);
}

int WorldSpec::category_index(const std::string& name) const {
  auto it = std::find(categories.begin(), categories.end(), name);
  return it == categories.end() ? -1 : static_cast<int>(it - categories.begin());
}

void WorldSpec::validate() const {
  if (!(bounds_max.x() > bounds_min.x() && bounds_max.y() > bounds_min.y()))
    throw InvalidInput("world bounds are empty");
  for (const auto& o : objects) {
    if (category_index(o.category) < 0) throw InvalidInput("undeclared category " + o.category);
    if ((o.box.max - o.box.min).minCoeff() <= 0) throw InvalidInput("degenerate object box");
    if (o.box.min.x() < bounds_min.x() || o.box.min.y() < bounds_min.y() ||
        o.box.max.x() > bounds_max.x() || o.box.max.y() > bounds_max.y())
      throw InvalidInput("object outside bounds");
    for (const auto& w : walls) {
      const Vec3 lo = o.box.min.cwiseMax(w.min);
      const Vec3 hi = o.box.max.cwiseMin(w.max);
      if ((hi - lo).minCoeff() > 0) throw InvalidInput("object overlaps a wall");
    }
  }
}

geometry::CameraIntrinsics intrinsics(const AgentConfig& agent) {
  return geometry::CameraIntrinsics::from_hfov(agent.width, agent.height, agent.hfov_deg,
                                               agent.max_range);
}

geometry::Pose camera_pose(const AgentConfig& agent, const AgentState& state) {
  return geometry::Pose::from_agent(state.position.x(), state.position.y(), state.heading_deg,
                                    agent.camera_height);
}

namespace {

struct Interval {
  double t0, t1;
  double zmin, zmax;
  int segment;
};

// Parameter range where p + t*d lies inside the rectangle, clipped to t >= 0.
bool slab2(const Vec2& p, const Vec2& d, const Vec2& lo, const Vec2& hi, double& t0, double& t1) {
  t0 = 0;
  t1 = kInf;
  for (int i = 0; i < 2; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
      continue;
    }
    double a = (lo[i] - p[i]) / d[i];
    double b = (hi[i] - p[i]) / d[i];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  return t0 <= t1;
}

// Entry/exit parameters of segment a + t*(b - a), t in [0, 1], through a box.
bool segment_box(const Vec3& a, const Vec3& b, const Box& box, double& t0, double& t1) {
  const Vec3 d = b - a;
  t0 = 0;
  t1 = 1;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (a[i] < box.min[i] || a[i] > box.max[i]) return false;
      continue;
    }
    double lo = (box.min[i] - a[i]) / d[i];
    double hi = (box.max[i] - a[i]) / d[i];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return false;
  }
  return true;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

double segment_rect_distance(const Vec2& a, const Vec2& b, const Box& box) {
  double t0, t1;
  if (slab2(a, b - a, box.footprint_min(), box.footprint_max(), t0, t1) && t0 <= 1.0) return 0.0;
  double d = std::min(footprint_distance(box, a), footprint_distance(box, b));
  for (int i = 0; i < 4; ++i) {
    const Vec2 corner((i & 1) ? box.max.x() : box.min.x(), (i & 2) ? box.max.y() : box.min.y());
    d = std::min(d, point_segment_distance(corner, a, b));
  }
  return d;
}

template <class Fn>
void for_each_box(const WorldSpec& world, Fn&& fn) {
  for (const auto& w : world.walls) fn(w, -1);
  for (std::size_t i = 0; i < world.objects.size(); ++i) fn(world.objects[i].box, static_cast<int>(i));
}

}  // namespace

Observation render(const WorldSpec& world, const AgentState& state) {
  Observation obs;
  obs.intrinsics = intrinsics(world.agent);
  obs.pose = camera_pose(world.agent, state);
  const auto& intr = obs.intrinsics;
  obs.depth = geometry::DepthImage(intr.width, intr.height, intr.max_range);
  obs.segments.assign(static_cast<std::size_t>(intr.width) * intr.height, -1);

  const double yaw = deg2rad(state.heading_deg);
  const Vec2 fwd(std::cos(yaw), std::sin(yaw));
  const Vec2 right(std::sin(yaw), -std::cos(yaw));
  const Vec2 p = state.position;
  const double ch = world.agent.camera_height;

  // The camera is level, so every ray of a column shares one vertical plane:
  // intersect the footprints once per column, then resolve heights per row.
  std::vector<Interval> hits;
  for (int u = 0; u < intr.width; ++u) {
    const double xn = (u - intr.cx) / intr.fx;
    const Vec2 h = fwd + xn * right;
    hits.clear();
    for_each_box(world, [&](const Box& b, int seg) {
      double t0, t1;
      if (slab2(p, h, b.footprint_min(), b.footprint_max(), t0, t1))
        hits.push_back({t0, t1, b.min.z(), b.max.z(), seg});
    });
    std::sort(hits.begin(), hits.end(), [](const Interval& a, const Interval& b) {
      return a.t0 != b.t0 ? a.t0 < b.t0 : a.segment < b.segment;
    });
    for (int v = 0; v < intr.height; ++v) {
      const double yn = (v - intr.cy) / intr.fy;  // z(t) = ch - t * yn
      double best = yn > 0 ? ch / yn : kInf;
      int seg = -1;
      for (const auto& it : hits) {
        if (it.t0 >= best) break;
        const double z0 = ch - it.t0 * yn;
        double t = kInf;
        if (z0 >= it.zmin && z0 <= it.zmax) {
          t = it.t0;
        } else if (yn > 0 && z0 > it.zmax) {
          t = (ch - it.zmax) / yn;
        } else if (yn < 0 && z0 < it.zmin) {
          t = (ch - it.zmin) / yn;
        }
        if (t <= it.t1 && t < best) {
          best = t;
          seg = it.segment;
        }
      }
      const auto idx = static_cast<std::size_t>(v) * intr.width + u;
      if (best < intr.max_range) {
        obs.depth.data[idx] = best;
        obs.segments[idx] = seg;
      }
    }
  }
  return obs;
}

bool collides(const WorldSpec& world, const Vec2& p) {
  bool hit = false;
  for_each_box(world, [&](const Box& b, int) { hit = hit || footprint_distance(b, p) < world.agent.radius; });
  return hit;
}

AgentState step(const WorldSpec& world, const AgentState& state, Action action, double forward_step,
                double turn_deg) {
  if (state.stopped) throw InvalidInput("action after stop");
  AgentState next = state;
  ++next.steps;
  switch (action) {
    case Action::Forward: {
      const double yaw = deg2rad(state.heading_deg);
      const Vec2 target = state.position + forward_step * Vec2(std::cos(yaw), std::sin(yaw));
      bool blocked = false;
      for_each_box(world, [&](const Box& b, int) {
        blocked = blocked || segment_rect_distance(state.position, target, b) < world.agent.radius;
      });
      if (!blocked) next.position = target;
      break;
    }
    case Action::TurnLeft:
    case Action::TurnRight: {
      const double d = action == Action::TurnLeft ? turn_deg : -turn_deg;
      double h = std::fmod(state.heading_deg + d, 360.0);
      if (h < 0) h += 360.0;
      if (h >= 360.0) h -= 360.0;
      next.heading_deg = h;
      break;
    }
    case Action::Stop:
      next.stopped = true;
      break;
  }
  return next;
}

NavMap gt_navigability(const WorldSpec& world, double resolution) {
  NavMap nav;
  nav.shape.resolution = resolution;
  nav.shape.origin = Vec2(std::floor(world.bounds_min.x() / resolution) * resolution,
                          std::floor(world.bounds_min.y() / resolution) * resolution);
  nav.shape.cols = static_cast<int>(std::ceil((world.bounds_max.x() - nav.shape.origin.x()) / resolution));
  nav.shape.rows = static_cast<int>(std::ceil((world.bounds_max.y() - nav.shape.origin.y()) / resolution));
  nav.blocked.assign(nav.shape.size(), 0);
  const double r = world.agent.radius;
  for_each_box(world, [&](const Box& b, int) {
    const Cell lo = nav.shape.cell_of(b.footprint_min() - Vec2(r, r));
    const Cell hi = nav.shape.cell_of(b.footprint_max() + Vec2(r, r));
    for (int row = std::max(0, lo.row - 1); row <= std::min(nav.shape.rows - 1, hi.row + 1); ++row)
      for (int col = std::max(0, lo.col - 1); col <= std::min(nav.shape.cols - 1, hi.col + 1); ++col)
        if (footprint_distance(b, nav.shape.center_of({row, col})) < r)
          nav.blocked[nav.shape.index({row, col})] = 1;
  });
  // Everything outside the floor rectangle is blocked.
  for (std::size_t i = 0; i < nav.blocked.size(); ++i) {
    const Vec2 c = nav.shape.center_of(nav.shape.cell_at(i));
    if (c.x() < world.bounds_min.x() || c.y() < world.bounds_min.y() || c.x() > world.bounds_max.x() ||
        c.y() > world.bounds_max.y())
      nav.blocked[i] = 1;
  }
  return nav;
}

int free_components(const NavMap& nav) {
  std::vector<std::uint8_t> seen(nav.blocked.size(), 0);
  int components = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < nav.blocked.size(); ++s) {
    if (nav.blocked[s] || seen[s]) continue;
    ++components;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const Cell c = nav.shape.cell_at(stack.back());
      stack.pop_back();
      const Cell next[4] = {{c.row - 1, c.col}, {c.row + 1, c.col}, {c.row, c.col - 1}, {c.row, c.col + 1}};
      for (const auto& n : next) {
        if (!nav.free(n)) continue;
        const auto i = nav.shape.index(n);
        if (seen[i]) continue;
        seen[i] = 1;
        stack.push_back(i);
      }
    }
  }
  return components;
}

namespace {

std::vector<Vec3> surface_samples(const Box& b, double spacing) {
  std::vector<Vec3> out;
  const Vec3 ext = b.max - b.min;
  auto n_of = [spacing](double len) { return std::max(1, static_cast<int>(std::ceil(len / spacing))); };
  const int nx = n_of(ext.x()), ny = n_of(ext.y()), nz = n_of(ext.z());
  auto frac = [](int i, int n) { return (i + 0.5) / n; };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      out.emplace_back(b.min.x() + frac(i, nx) * ext.x(), b.min.y() + frac(j, ny) * ext.y(), b.max.z());
  for (int k = 0; k < nz; ++k) {
    const double z = b.min.z() + frac(k, nz) * ext.z();
    for (int i = 0; i < nx; ++i) {
      const double x = b.min.x() + frac(i, nx) * ext.x();
      out.emplace_back(x, b.min.y(), z);
      out.emplace_back(x, b.max.y(), z);
    }
    for (int j = 0; j < ny; ++j) {
      const double y = b.min.y() + frac(j, ny) * ext.y();
      out.emplace_back(b.min.x(), y, z);
      out.emplace_back(b.max.x(), y, z);
    }
  }
  return out;
}

}  // namespace

bool object_visible(const WorldSpec& world, std::size_t index, const Vec2& position) {
  const auto& target = world.objects.at(index).box;
  const Vec3 cam(position.x(), position.y(), world.agent.camera_height);
  const double half_vfov = 0.5 * intrinsics(world.agent).vfov_rad();
  constexpr double kEps = 1e-9;
  for (const auto& s : surface_samples(target, 0.1)) {
    const double horiz = std::hypot(s.x() - cam.x(), s.y() - cam.y());
    if (horiz > world.agent.max_range) continue;
    if (std::abs(std::atan2(s.z() - cam.z(), horiz)) > half_vfov) continue;
    bool occluded = false;
    for_each_box(world, [&](const Box& b, int seg) {
      if (occluded) return;
      double t0, t1;
      if (!segment_box(cam, s, b, t0, t1)) return;
      // The sample lies on the target's surface; any earlier entry hides it.
      occluded = seg == static_cast<int>(index) ? t0 < 1.0 - kEps : t0 < 1.0 - kEps && t1 > kEps;
    });
    if (!occluded) return true;
  }
  return false;
}

std::vector<objects::SegmentMask> gt_segments(const WorldSpec& world, const Observation& obs,
                                              const SegmentationNoise& noise, Rng& rng) {
  const int w = obs.intrinsics.width, h = obs.intrinsics.height;
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < obs.segments.size(); ++i)
    if (obs.segments[i] >= 0) groups[obs.segments[i]].push_back(static_cast<int>(i));

  const int k = static_cast<int>(world.categories.size());
  std::vector<objects::SegmentMask> out;
  for (auto& [obj, pixels] : groups) {
    for (int e = 0; e < noise.erosion && !pixels.empty(); ++e) {
      std::vector<std::uint8_t> in(obs.segments.size(), 0);
      for (int p : pixels) in[static_cast<std::size_t>(p)] = 1;
      std::vector<int> kept;
      for (int p : pixels) {
        const int u = p % w, v = p / w;
        auto inside = [&](int uu, int vv) {
          return uu >= 0 && uu < w && vv >= 0 && vv < h && in[static_cast<std::size_t>(vv) * w + uu];
        };
        if (inside(u - 1, v) && inside(u + 1, v) && inside(u, v - 1) && inside(u, v + 1)) kept.push_back(p);
      }
      pixels = std::move(kept);
    }
    int cat = world.category_index(world.objects[static_cast<std::size_t>(obj)].category);
    if (noise.flip_probability > 0 && k > 1 && rng.bernoulli(noise.flip_probability)) {
      const int other = rng.uniform_int(0, k - 2);
      cat = other >= cat ? other + 1 : other;
    }
    if (pixels.empty()) continue;
    objects::SegmentMask m;
    m.pixels = std::move(pixels);
    m.category_dist.assign(static_cast<std::size_t>(k), 0.0);
    m.category_dist[static_cast<std::size_t>(cat)] = 1.0;
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

constexpr double kWallHalf = 0.05;
constexpr double kWallHeight = 2.5;

struct Size3 {
  double along, depth, height;
};

Size3 category_size(const std::string& name) {
  static const std::map<std::string, Size3> table = {
      {"chair", {0.50, 0.50, 0.90}}, {"bed", {1.60, 2.00, 0.60}},    {"plant", {0.40, 0.40, 0.90}},
      {"toilet", {0.45, 0.70, 0.75}}, {"tv_monitor", {0.90, 0.25, 1.10}}, {"sofa", {1.90, 0.90, 0.80}},
  };
  auto it = table.find(name);
  return it == table.end() ? Size3{0.5, 0.5, 0.8} : it->second;
}

struct Rect {
  Vec2 lo, hi;
  bool overlaps(const Rect& o) const {
    return lo.x() < o.hi.x() && o.lo.x() < hi.x() && lo.y() < o.hi.y() && o.lo.y() < hi.y();
  }
  Rect grown(double m) const { return {lo - Vec2(m, m), hi + Vec2(m, m)}; }
};

Box wall_box(double x0, double y0, double x1, double y1) {
  return {Vec3(x0, y0, 0.0), Vec3(x1, y1, kWallHeight)};
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)];
  return i;
}

void block_around(NavMap& nav, const Box& b, double radius) {
  const Cell lo = nav.shape.cell_of(b.footprint_min() - Vec2(radius, radius));
  const Cell hi = nav.shape.cell_of(b.footprint_max() + Vec2(radius, radius));
  for (int r = std::max(0, lo.row - 1); r <= std::min(nav.shape.rows - 1, hi.row + 1); ++r)
    for (int c = std::max(0, lo.col - 1); c <= std::min(nav.shape.cols - 1, hi.col + 1); ++c)
      if (footprint_distance(b, nav.shape.center_of({r, c})) < radius) nav.blocked[nav.shape.index({r, c})] = 1;
}

}  // namespace

WorldSpec generate_world(std::uint64_t seed, const GenParams& p) {
  if (p.min_rooms < 1 || p.max_rooms < p.min_rooms) throw GenerationError("bad room count range");
  if (!(p.room_min > 0) || p.room_max < p.room_min) throw GenerationError("bad room size range");
  if (!(p.door_min > 2 * p.agent.radius) || p.door_max < p.door_min)
    throw GenerationError("doors must be wider than the agent");
  if (p.door_max + 0.8 > p.room_min) throw GenerationError("rooms too small for doors");
  if (p.categories.empty()) throw GenerationError("empty category list");
  if (p.objects_per_room < 0) throw GenerationError("negative object density");

  Rng rng(seed);
  WorldSpec world;
  world.categories = p.categories;
  world.agent = p.agent;

  const int n = rng.uniform_int(p.min_rooms, p.max_rooms);
  int nr = 1;
  for (int d = 1; d * d <= n; ++d)
    if (n % d == 0) nr = d;
  int nc = n / nr;
  if (rng.bernoulli(0.5)) std::swap(nr, nc);

  std::vector<double> xs{0.0}, ys{0.0};
  for (int j = 0; j < nc; ++j) xs.push_back(xs.back() + rng.uniform(p.room_min, p.room_max));
  for (int i = 0; i < nr; ++i) ys.push_back(ys.back() + rng.uniform(p.room_min, p.room_max));
  const double W = xs.back(), H = ys.back();
  world.bounds_min = Vec2(-kWallHalf, -kWallHalf);
  world.bounds_max = Vec2(W + kWallHalf, H + kWallHalf);

  world.walls.push_back(wall_box(-kWallHalf, -kWallHalf, W + kWallHalf, kWallHalf));
  world.walls.push_back(wall_box(-kWallHalf, H - kWallHalf, W + kWallHalf, H + kWallHalf));
  world.walls.push_back(wall_box(-kWallHalf, -kWallHalf, kWallHalf, H + kWallHalf));
  world.walls.push_back(wall_box(W - kWallHalf, -kWallHalf, W + kWallHalf, H + kWallHalf));

  struct Edge {
    int a, b;
    bool vertical_wall;  // wall runs along y at x = line
    double line, s0, s1;
  };
  std::vector<Edge> edges;
  auto room = [nc](int i, int j) { return i * nc + j; };
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) {
      if (j + 1 < nc) edges.push_back({room(i, j), room(i, j + 1), true, xs[static_cast<std::size_t>(j + 1)], ys[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i + 1)]});
      if (i + 1 < nr) edges.push_back({room(i, j), room(i + 1, j), false, ys[static_cast<std::size_t>(i + 1)], xs[static_cast<std::size_t>(j)], xs[static_cast<std::size_t>(j + 1)]});
    }
  for (std::size_t i = edges.size(); i > 1; --i)
    std::swap(edges[i - 1], edges[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);

  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<Rect> door_zones;
  for (const auto& e : edges) {
    const int ra = find_root(parent, e.a), rb = find_root(parent, e.b);
    bool door = false;
    if (ra != rb) {
      parent[static_cast<std::size_t>(ra)] = rb;
      door = true;
    } else {
      door = rng.bernoulli(p.extra_door_probability);
    }
    std::vector<std::pair<double, double>> pieces;
    if (door) {
      const double width = rng.uniform(p.door_min, p.door_max);
      const double margin = 0.4 + 0.5 * width;
      const double c = rng.uniform(e.s0 + margin, e.s1 - margin);
      pieces = {{e.s0, c - 0.5 * width}, {c + 0.5 * width, e.s1}};
      const double reach = 0.9;
      door_zones.push_back(e.vertical_wall
                               ? Rect{Vec2(e.line - reach, c - 0.5 * width), Vec2(e.line + reach, c + 0.5 * width)}
                               : Rect{Vec2(c - 0.5 * width, e.line - reach), Vec2(c + 0.5 * width, e.line + reach)});
    } else {
      pieces = {{e.s0, e.s1}};
    }
    for (const auto& [s0, s1] : pieces) {
      if (e.vertical_wall)
        world.walls.push_back(wall_box(e.line - kWallHalf, s0, e.line + kWallHalf, s1));
      else
        world.walls.push_back(wall_box(s0, e.line - kWallHalf, s1, e.line + kWallHalf));
    }
  }

  NavMap nav = gt_navigability(world);
  if (free_components(nav) != 1) throw GenerationError("room layout is not connected");

  const double clearance = 0.5, gap = 0.02;
  std::vector<Rect> placed;
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nc; ++j) {
      const Rect inner{Vec2(xs[static_cast<std::size_t>(j)] + kWallHalf, ys[static_cast<std::size_t>(i)] + kWallHalf),
                       Vec2(xs[static_cast<std::size_t>(j + 1)] - kWallHalf, ys[static_cast<std::size_t>(i + 1)] - kWallHalf)};
      const double whole = std::floor(p.objects_per_room);
      int count = static_cast<int>(whole) + (rng.bernoulli(p.objects_per_room - whole) ? 1 : 0);
      for (int k = 0; k < count; ++k) {
        const auto& cat = p.categories[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(p.categories.size()) - 1))];
        const Size3 base = category_size(cat);
        const double along = base.along * rng.uniform(0.9, 1.1);
        const double depth = base.depth * rng.uniform(0.9, 1.1);
        const double height = std::max(0.6, base.height * rng.uniform(0.9, 1.1));
        for (int attempt = 0; attempt < 30; ++attempt) {
          Rect r;
          if (rng.bernoulli(0.6)) {
            const int side = rng.uniform_int(0, 3);
            const bool horizontal = side < 2;  // against a wall running along x
            const double len = horizontal ? inner.hi.x() - inner.lo.x() : inner.hi.y() - inner.lo.y();
            if (len < along + 2 * gap) continue;
            const double s = rng.uniform(gap, len - along - gap);
            if (horizontal) {
              const double x0 = inner.lo.x() + s;
              const double y0 = side == 0 ? inner.lo.y() + gap : inner.hi.y() - gap - depth;
              r = {Vec2(x0, y0), Vec2(x0 + along, y0 + depth)};
            } else {
              const double y0 = inner.lo.y() + s;
              const double x0 = side == 2 ? inner.lo.x() + gap : inner.hi.x() - gap - depth;
              r = {Vec2(x0, y0), Vec2(x0 + depth, y0 + along)};
            }
          } else {
            double sx = along, sy = depth;
            if (rng.bernoulli(0.5)) std::swap(sx, sy);
            const double m = 0.8;
            const double lox = inner.lo.x() + m, hix = inner.hi.x() - m - sx;
            const double loy = inner.lo.y() + m, hiy = inner.hi.y() - m - sy;
            if (hix <= lox || hiy <= loy) continue;
            const double x0 = rng.uniform(lox, hix), y0 = rng.uniform(loy, hiy);
            r = {Vec2(x0, y0), Vec2(x0 + sx, y0 + sy)};
          }
          bool ok = true;
          for (const auto& q : placed) ok = ok && !r.grown(clearance).overlaps(q);
          for (const auto& dz : door_zones) ok = ok && !r.overlaps(dz);
          if (!ok) continue;
          const Box box{Vec3(r.lo.x(), r.lo.y(), 0.0), Vec3(r.hi.x(), r.hi.y(), height)};
          NavMap trial = nav;
          block_around(trial, box, p.agent.radius);
          if (free_components(trial) != 1) continue;
          nav = std::move(trial);
          placed.push_back(r);
          world.objects.push_back({static_cast<int>(world.objects.size()), cat, box});
          break;
        }
      }
    }
  }
  world.validate();
  return world;
}

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec3 vec3_of(const json& j) {
  if (!j.is_array() || j.size() != 3) throw LoadError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
Vec2 vec2_of(const json& j) {
  if (!j.is_array() || j.size() != 2) throw LoadError("expected a 2-vector");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json world_to_json(const WorldSpec& w) {
  json j;
  j["format"] = "fomworld/1";
  j["categories"] = w.categories;
  j["bounds"] = {{"min", vec_json(w.bounds_min)}, {"max", vec_json(w.bounds_max)}};
  j["walls"] = json::array();
  for (const auto& b : w.walls) j["walls"].push_back({{"min", vec_json(b.min)}, {"max", vec_json(b.max)}});
  j["objects"] = json::array();
  for (const auto& o : w.objects)
    j["objects"].push_back(
        {{"id", o.id}, {"category", o.category}, {"min", vec_json(o.box.min)}, {"max", vec_json(o.box.max)}});
  j["agent"] = {{"radius", w.agent.radius},         {"camera_height", w.agent.camera_height},
                {"hfov_deg", w.agent.hfov_deg},     {"max_range", w.agent.max_range},
                {"width", w.agent.width},           {"height", w.agent.height}};
  return j;
}

WorldSpec world_from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != "fomworld/1") throw LoadError("world format tag is not fomworld/1");
    WorldSpec w;
    w.categories = j.at("categories").get<std::vector<std::string>>();
    w.bounds_min = vec2_of(j.at("bounds").at("min"));
    w.bounds_max = vec2_of(j.at("bounds").at("max"));
    for (const auto& b : j.at("walls")) w.walls.push_back({vec3_of(b.at("min")), vec3_of(b.at("max"))});
    for (const auto& o : j.at("objects"))
      w.objects.push_back({o.at("id").get<int>(), o.at("category").get<std::string>(),
                           {vec3_of(o.at("min")), vec3_of(o.at("max"))}});
    if (j.contains("agent")) {
      const auto& a = j["agent"];
      w.agent.radius = a.value("radius", w.agent.radius);
      w.agent.camera_height = a.value("camera_height", w.agent.camera_height);
      w.agent.hfov_deg = a.value("hfov_deg", w.agent.hfov_deg);
      w.agent.max_range = a.value("max_range", w.agent.max_range);
      w.agent.width = a.value("width", w.agent.width);
      w.agent.height = a.value("height", w.agent.height);
    }
    w.validate();
    return w;
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed world: ") + e.what());
  } catch (const InvalidInput& e) {
    throw LoadError(std::string("invalid world: ") + e.what());
  }
}

void save_world(const WorldSpec& world, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << world_to_json(world).dump(2) << "\n";
}

WorldSpec load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
  return world_from_json(j);
}

std::uint64_t world_hash(const WorldSpec& world) { return fnv1a(world_to_json(world).dump()); }

}  // namespace fomnav::sim
