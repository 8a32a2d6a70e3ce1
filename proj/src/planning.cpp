#include "fomnav/planning.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace fomnav::planning {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double eikonal_update(double a, double b, double h) {
  if (a > b) std::swap(a, b);
  if (b == kInf || b - a >= h) return a + h;
  const double d = b - a;
  return 0.5 * (a + b + std::sqrt(2.0 * h * h - d * d));
}

std::vector<Cell> snap_sources(const GridShape& shape, std::span<const std::uint8_t> blocked,
                               const CellBox& roi, std::span<const Cell> sources, int radius) {
  auto free = [&](const Cell& c) {
    return shape.in_bounds(c) && roi.contains(c) && !blocked[shape.index(c)];
  };
  std::vector<Cell> offsets;
  for (int dr = -radius; dr <= radius; ++dr)
    for (int dc = -radius; dc <= radius; ++dc)
      if (dr * dr + dc * dc <= radius * radius) offsets.push_back({dr, dc});
  std::sort(offsets.begin(), offsets.end(), [](const Cell& a, const Cell& b) {
    const int da = a.row * a.row + a.col * a.col;
    const int db = b.row * b.row + b.col * b.col;
    return da != db ? da < db : a < b;
  });
  std::vector<Cell> out;
  for (const auto& s : sources) {
    for (const auto& o : offsets) {
      const Cell c{s.row + o.row, s.col + o.col};
      if (free(c)) {
        out.push_back(c);
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

DistanceField fmm_field(const GridShape& shape, std::span<const std::uint8_t> blocked,
                        std::span<const Cell> sources, const FmmOptions& opt) {
  if (blocked.size() != shape.size()) throw InvalidInput("fmm_field: mask size does not match grid");
  const CellBox roi = opt.roi.empty() ? shape.full() : shape.clip(opt.roi);
  const double h = shape.resolution;

  DistanceField field;
  field.shape = shape;
  field.values.assign(shape.size(), kInf);
  field.sources = snap_sources(shape, blocked, roi, sources, std::max(0, opt.snap_cells));
  if (field.sources.empty()) throw UnreachableSource("fmm_field: no navigable source");

  auto free = [&](int r, int c) {
    return r >= roi.r0 && r <= roi.r1 && c >= roi.c0 && c <= roi.c1 &&
           !blocked[static_cast<std::size_t>(r) * shape.cols + c];
  };
  std::vector<std::uint8_t> frozen(shape.size(), 0);
  auto known = [&](int r, int c) {
    if (r < roi.r0 || r > roi.r1 || c < roi.c0 || c > roi.c1) return kInf;
    const auto i = static_cast<std::size_t>(r) * shape.cols + c;
    return frozen[i] ? field.values[i] : kInf;
  };

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (const auto& s : field.sources) {
    field.values[shape.index(s)] = 0.0;
    heap.push({0.0, shape.index(s)});
  }
  // Exact distances near each source, where the bounding box to the source is free.
  const int R = std::max(0, opt.exact_init_cells);
  for (const auto& s : field.sources)
    for (int dr = -R; dr <= R; ++dr)
      for (int dc = -R; dc <= R; ++dc) {
        if (dr * dr + dc * dc > R * R) continue;
        const int r = s.row + dr, q = s.col + dc;
        bool clear = true;
        for (int rr = std::min(r, s.row); clear && rr <= std::max(r, s.row); ++rr)
          for (int cc = std::min(q, s.col); clear && cc <= std::max(q, s.col); ++cc) clear = free(rr, cc);
        if (!clear) continue;
        const auto i = static_cast<std::size_t>(r) * shape.cols + q;
        const double e = std::hypot(dr, dc) * h;
        if (e < field.values[i]) {
          field.values[i] = e;
          heap.push({e, i});
        }
      }

  while (!heap.empty()) {
    const auto [t, idx] = heap.top();
    heap.pop();
    if (frozen[idx] || t > field.values[idx]) continue;
    frozen[idx] = 1;
    const Cell c = shape.cell_at(idx);
    for (const auto& d : kNeighbors8) {
      const int r = c.row + d[0], q = c.col + d[1];
      if (!free(r, q)) continue;
      const auto n = static_cast<std::size_t>(r) * shape.cols + q;
      if (frozen[n]) continue;
      const double a = std::min(known(r, q - 1), known(r, q + 1));
      const double b = std::min(known(r - 1, q), known(r + 1, q));
      double best = eikonal_update(a, b, h);
      for (int dr : {-1, 1})
        for (int dc : {-1, 1}) {
          const double td = known(r + dr, q + dc);
          if (td < kInf && free(r + dr, q) && free(r, q + dc)) best = std::min(best, td + kSqrt2 * h);
        }
      if (best < field.values[n]) {
        field.values[n] = best;
        heap.push({best, n});
      }
    }
  }
  return field;
}

DistanceField fmm_field(const mapping::FrontierObjectMap& map, std::span<const Cell> sources,
                        const FmmOptions& opt) {
  const auto blocked = map.blocked_mask();
  return fmm_field(map.grid.shape(), blocked, sources, opt);
}

Plan astar_plan(const GridShape& shape, std::span<const std::uint8_t> blocked, const Cell& start,
                const DistanceField& field) {
  if (blocked.size() != shape.size() || !field.shape.same_lattice(shape))
    throw InvalidInput("astar_plan: grid mismatch");
  auto open_cell = [&](int r, int c) {
    return r >= 0 && r < shape.rows && c >= 0 && c < shape.cols &&
           !blocked[static_cast<std::size_t>(r) * shape.cols + c] &&
           field.values[static_cast<std::size_t>(r) * shape.cols + c] < kInf;
  };
  if (!open_cell(start.row, start.col)) throw NoPath("astar_plan: start is blocked or unreachable");

  const double h = shape.resolution;
  std::vector<double> g(shape.size(), kInf);
  std::vector<std::int64_t> parent(shape.size(), -1);
  std::vector<std::uint8_t> closed(shape.size(), 0);
  // Min f, then larger g (deeper nodes first), then lower index.
  using Entry = std::tuple<double, double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const auto s = shape.index(start);
  g[s] = 0;
  open.push({field.values[s], -0.0, s});

  Plan plan;
  while (!open.empty()) {
    const auto [f, neg_g, idx] = open.top();
    open.pop();
    if (closed[idx] || -neg_g > g[idx]) continue;
    closed[idx] = 1;
    ++plan.expanded;
    if (field.values[idx] == 0.0) {
      plan.cost = g[idx];
      for (auto i = static_cast<std::int64_t>(idx); i >= 0; i = parent[static_cast<std::size_t>(i)])
        plan.cells.push_back(shape.cell_at(static_cast<std::size_t>(i)));
      std::reverse(plan.cells.begin(), plan.cells.end());
      return plan;
    }
    const Cell c = shape.cell_at(idx);
    for (const auto& d : kNeighbors8) {
      const int r = c.row + d[0], q = c.col + d[1];
      if (!open_cell(r, q)) continue;
      const bool diagonal = d[0] != 0 && d[1] != 0;
      if (diagonal && (!open_cell(c.row + d[0], c.col) || !open_cell(c.row, c.col + d[1]))) continue;
      const auto n = static_cast<std::size_t>(r) * shape.cols + q;
      if (closed[n]) continue;
      const double ng = g[idx] + (diagonal ? kSqrt2 * h : h);
      if (ng < g[n]) {
        g[n] = ng;
        parent[n] = static_cast<std::int64_t>(idx);
        open.push({ng + field.values[n], -ng, n});
      }
    }
  }
  throw NoPath("astar_plan: goal region unreachable");
}

namespace {

void clear_segment(std::vector<std::uint8_t>& mask, const GridShape& shape, const Vec2& a,
                   const Vec2& b) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / (0.25 * shape.resolution))));
  for (int i = 0; i <= n; ++i) {
    const Cell c = shape.cell_of(a + (b - a) * (static_cast<double>(i) / n));
    if (shape.in_bounds(c)) mask[shape.index(c)] = 0;
  }
}

CellBox box_of(std::span<const Cell> cells) {
  CellBox b;
  for (const auto& c : cells) b.expand(c);
  return b;
}

}  // namespace

std::vector<Cell> stopping_area(const mapping::FrontierObjectMap& map,
                                const objects::ObjectInstance& obj, double stop_radius) {
  const auto& shape = map.grid.shape();
  const auto footprint = objects::footprint_cells(obj, shape);
  if (footprint.empty() || !(stop_radius > 0)) return {};

  const double res = shape.resolution;
  const int reach = static_cast<int>(std::ceil(stop_radius / res)) + 2;
  const int infl = static_cast<int>(std::ceil(map.grid.inflation_radius() / res));
  const CellBox roi = shape.clip(box_of(footprint).dilated(reach));

  // Target-free obstacle layer.
  std::vector<std::uint8_t> obstacles(map.grid.obstacle_mask().begin(), map.grid.obstacle_mask().end());
  for (const auto& c : footprint) obstacles[shape.index(c)] = 0;
  const Vec2 center = obj.center.head<2>();
  for (const auto& o : obj.observers) clear_segment(obstacles, shape, center, o);
  auto blocked = inflate_mask(shape, obstacles, map.grid.inflation_radius(), roi.dilated(infl));
  const auto col = map.collision.mask();
  for (std::size_t i = 0; i < blocked.size(); ++i) blocked[i] |= col[i];
  for (const auto& c : footprint) blocked[shape.index(c)] = 0;

  FmmOptions opt;
  opt.roi = roi;
  opt.snap_cells = 0;
  const auto field = fmm_field(shape, blocked, footprint, opt);

  std::vector<Cell> area;
  for (int r = roi.r0; r <= roi.r1; ++r)
    for (int c = roi.c0; c <= roi.c1; ++c) {
      const Cell cell{r, c};
      if (field.at(cell) < stop_radius && map.navigable(cell)) area.push_back(cell);
    }
  return area;
}

Target resolve_goal(const mapping::FrontierObjectMap& map, const GoalChoice& choice,
                    const PlanningConfig& cfg) {
  Target t;
  if (choice.kind == GoalKind::Frontier) {
    const auto* f = map.find_frontier(choice.id);
    if (!f) throw StaleGoal("unknown frontier id " + std::to_string(choice.id));
    t.cells = {f->center_cell};
    return t;
  }
  const auto* obj = map.objects.find(choice.id);
  if (!obj) throw StaleGoal("unknown object id " + std::to_string(choice.id));

  for (const auto& c : stopping_area(map, *obj, cfg.stop_radius))
    if (map.grid.state(c) == CellState::FreeExplored) t.cells.push_back(c);
  if (!t.cells.empty()) {
    t.stop_area = true;
    return t;
  }
  if (map.frontiers.empty()) return t;

  // Not reachable through explored space yet: head for the frontier
  // geodesically closest to the object.
  const auto& shape = map.grid.shape();
  const auto footprint = objects::footprint_cells(*obj, shape);
  auto blocked = map.blocked_mask();
  for (const auto& c : footprint) blocked[shape.index(c)] = 0;
  CellBox roi = map.grid.known_box();
  roi.expand(box_of(footprint));
  FmmOptions opt;
  opt.roi = shape.clip(roi.dilated(2));
  opt.snap_cells = 0;
  std::optional<DistanceField> field;
  if (!footprint.empty()) field = fmm_field(shape, blocked, footprint, opt);

  const mapping::Frontier* best = nullptr;
  double best_d = kInf;
  for (const auto& f : map.frontiers) {
    double d = field ? field->at(f.center_cell) : kInf;
    if (d == kInf) d = 1e6 + (f.center - obj->center.head<2>()).norm();
    if (!best || d < best_d || (d == best_d && f.id < best->id)) {
      best = &f;
      best_d = d;
    }
  }
  t.cells = {best->center_cell};
  t.via_frontier = best->id;
  return t;
}

Action path_to_actions(std::span<const Cell> path, const GridShape& shape, const Vec2& position,
                       double heading_deg, bool at_stop, const PlanningConfig& cfg) {
  if (at_stop) return Action::Stop;
  if (path.empty()) throw InvalidInput("path_to_actions: empty path");
  if (path.size() == 1) return Action::TurnLeft;
  Vec2 waypoint = shape.center_of(path.back());
  for (const auto& c : path.subspan(1)) {
    const Vec2 p = shape.center_of(c);
    if ((p - position).norm() >= cfg.waypoint_lookahead) {
      waypoint = p;
      break;
    }
  }
  const Vec2 d = waypoint - position;
  if (d.norm() < 1e-9) return Action::TurnLeft;
  double diff = rad2deg(std::atan2(d.y(), d.x())) - heading_deg;
  diff = std::remainder(diff, 360.0);
  if (std::abs(diff) <= cfg.heading_tolerance_deg) return Action::Forward;
  return diff > 0 ? Action::TurnLeft : Action::TurnRight;
}

bool record_collision(CollisionMap& collision, const Vec2& before, const Vec2& after,
                      double heading_deg, Action action, const PlanningConfig& cfg) {
  if (action != Action::Forward || (after - before).norm() >= cfg.collision_epsilon) return false;
  const double a = deg2rad(heading_deg);
  const Vec2 ahead = before + cfg.forward_step * Vec2(std::cos(a), std::sin(a));
  const Cell c = collision.shape().cell_of(ahead);
  bool added = false;
  for (const auto& o : disc_offsets(cfg.collision_mark_radius, collision.shape().resolution))
    added = collision.mark({c.row + o.row, c.col + o.col}) || added;
  return added;
}

}  // namespace fomnav::planning
