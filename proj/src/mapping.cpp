#include "fomnav/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>

namespace fomnav::mapping {

FrontierObjectMap FrontierObjectMap::create(const MappingConfig& config, const Vec2& start) {
  FrontierObjectMap m;
  m.config = config;
  m.scene = geometry::VoxelAccumulator(config.voxel);
  GridShape shape;
  shape.resolution = config.resolution;
  const int n = static_cast<int>(std::ceil(config.extent / config.resolution));
  shape.rows = n;
  shape.cols = n;
  const double half = 0.5 * n * config.resolution;
  shape.origin = Vec2(std::floor((start.x() - half) / config.resolution) * config.resolution,
                      std::floor((start.y() - half) / config.resolution) * config.resolution);
  m.grid = OccupancyGrid(shape, config.inflation_radius);
  m.collision = CollisionMap(shape);
  return m;
}

const Frontier* FrontierObjectMap::find_frontier(int id) const {
  for (const auto& f : frontiers)
    if (f.id == id) return &f;
  return nullptr;
}

std::vector<std::uint8_t> FrontierObjectMap::blocked_mask() const {
  const auto infl = grid.inflated_mask();
  const auto col = collision.mask();
  std::vector<std::uint8_t> out(infl.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = infl[i] | col[i];
  return out;
}

std::size_t integrate_observation(FrontierObjectMap& map, const geometry::DepthImage& depth,
                           const geometry::CameraIntrinsics& intr, const geometry::Pose& pose) {
  const auto cloud = geometry::backproject_depth(depth, intr, pose);
  const auto& cfg = map.config;
  const auto& shape = map.grid.shape();
  const Vec3 cam = pose.translation;

  // Nearest obstacle-band return per image column, horizontal meters.
  std::vector<double> free_len(static_cast<std::size_t>(intr.width), intr.max_range);
  std::size_t k = 0, added = 0;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (!geometry::valid_depth(depth.at(u, v), intr)) continue;
      const Vec3& p = cloud.points[k++];
      map.scene.add(p);
      if (p.z() < cfg.obstacle_min_z || p.z() > cfg.obstacle_max_z) continue;
      added += map.grid.set_obstacle(shape.cell_of(p.head<2>()));
      const double r = std::hypot(p.x() - cam.x(), p.y() - cam.y());
      free_len[static_cast<std::size_t>(u)] = std::min(free_len[static_cast<std::size_t>(u)], r);
    }
  }

  const Vec2 origin = cam.head<2>();
  map.grid.set_explored(shape.cell_of(origin));
  const double step = 0.5 * shape.resolution;
  const int rays = std::max(1, cfg.rays_per_column);
  for (int u = 0; u < intr.width; ++u) {
    for (int s = 0; s < rays; ++s) {
      if (s > 0 && u + 1 >= intr.width) break;
      const double uf = u + static_cast<double>(s) / rays;
      const Vec3 d = pose.rotation * Vec3((uf - intr.cx) / intr.fx, 0.0, 1.0);
      Vec2 dir(d.x(), d.y());
      const double norm = dir.norm();
      if (norm < 1e-12) continue;
      dir /= norm;
      double len = free_len[static_cast<std::size_t>(u)];
      if (s > 0) len = std::min(len, free_len[static_cast<std::size_t>(u + 1)]);
      for (double t = step; t < len - step; t += step) map.grid.set_explored(shape.cell_of(origin + t * dir));
    }
  }
  return added;
}

bool is_frontier_cell(const OccupancyGrid& grid, const Cell& c) {
  if (grid.state(c) != CellState::FreeExplored || grid.is_inflated(c)) return false;
  for (const auto& d : kNeighbors8) {
    const Cell n{c.row + d[0], c.col + d[1]};
    if (grid.in_bounds(n) && grid.state(n) == CellState::Unknown) return true;
  }
  return false;
}

namespace {

std::vector<int> hop_distances(const std::vector<Cell>& cells, const Cell& from) {
  std::map<Cell, int> index;
  for (std::size_t i = 0; i < cells.size(); ++i) index[cells[i]] = static_cast<int>(i);
  std::vector<int> dist(cells.size(), -1);
  std::deque<int> q;
  const int s = index.at(from);
  dist[static_cast<std::size_t>(s)] = 0;
  q.push_back(s);
  while (!q.empty()) {
    const int i = q.front();
    q.pop_front();
    const Cell c = cells[static_cast<std::size_t>(i)];
    for (const auto& d : kNeighbors8) {
      auto it = index.find({c.row + d[0], c.col + d[1]});
      if (it == index.end() || dist[static_cast<std::size_t>(it->second)] >= 0) continue;
      dist[static_cast<std::size_t>(it->second)] = dist[static_cast<std::size_t>(i)] + 1;
      q.push_back(it->second);
    }
  }
  return dist;
}

std::size_t farthest(const std::vector<Cell>& cells, const std::vector<int>& dist) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i)
    if (dist[i] > dist[best] || (dist[i] == dist[best] && cells[i] < cells[best])) best = i;
  return best;
}

FrontierGeometry shape_component(std::vector<Cell> cells) {
  FrontierGeometry g;
  const Cell seed = cells.front();
  const auto d0 = hop_distances(cells, seed);
  g.end1 = cells[farthest(cells, d0)];
  const auto d1 = hop_distances(cells, g.end1);
  g.end2 = cells[farthest(cells, d1)];
  const int span = *std::max_element(d1.begin(), d1.end());

  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (d1[a] != d1[b]) return d1[a] < d1[b];
    return cells[a] < cells[b];
  });
  g.cells.reserve(cells.size());
  for (auto i : order) g.cells.push_back(cells[i]);

  // Cell nearest the middle of the end-to-end hop chain.
  std::size_t best = order.front();
  for (auto i : order)
    if (std::abs(2 * d1[i] - span) < std::abs(2 * d1[best] - span)) best = i;
  g.center = cells[best];
  return g;
}

}  // namespace

std::vector<FrontierGeometry> extract_frontiers(const OccupancyGrid& grid, int min_cells) {
  std::vector<FrontierGeometry> out;
  const auto& shape = grid.shape();
  const CellBox box = shape.clip(grid.known_box().dilated(1));
  if (box.empty()) return out;
  const int bw = box.c1 - box.c0 + 1;
  const int bh = box.r1 - box.r0 + 1;
  auto local = [&](const Cell& c) {
    return static_cast<std::size_t>(c.row - box.r0) * bw + (c.col - box.c0);
  };
  std::vector<std::uint8_t> frontier(static_cast<std::size_t>(bw) * bh, 0), seen(frontier.size(), 0);
  for (int r = box.r0; r <= box.r1; ++r)
    for (int c = box.c0; c <= box.c1; ++c) frontier[local({r, c})] = is_frontier_cell(grid, {r, c});

  for (int r = box.r0; r <= box.r1; ++r) {
    for (int c = box.c0; c <= box.c1; ++c) {
      const Cell start{r, c};
      if (!frontier[local(start)] || seen[local(start)]) continue;
      std::vector<Cell> comp;
      std::deque<Cell> q{start};
      seen[local(start)] = 1;
      while (!q.empty()) {
        const Cell cur = q.front();
        q.pop_front();
        comp.push_back(cur);
        for (const auto& d : kNeighbors8) {
          const Cell n{cur.row + d[0], cur.col + d[1]};
          if (!box.contains(n) || !frontier[local(n)] || seen[local(n)]) continue;
          seen[local(n)] = 1;
          q.push_back(n);
        }
      }
      if (static_cast<int>(comp.size()) < min_cells) continue;
      std::sort(comp.begin(), comp.end());
      out.push_back(shape_component(std::move(comp)));
    }
  }
  return out;
}

std::optional<PixelRect> frontier_pixel_mask(std::span<const Vec2> frontier_points,
                                             const geometry::CameraIntrinsics& intr,
                                             const geometry::Pose& pose, double agent_height,
                                             double above) {
  constexpr double kNear = 1e-6;
  double umin = kInf, umax = -kInf, vmin = kInf, vmax = -kInf;
  bool any_front = false;
  for (const auto& p : frontier_points) {
    for (double z : {0.0, agent_height + above}) {
      const Vec3 pc = pose.to_camera(Vec3(p.x(), p.y(), z));
      if (pc.z() > kNear) {
        const double u = intr.fx * pc.x() / pc.z() + intr.cx;
        const double v = intr.fy * pc.y() / pc.z() + intr.cy;
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        any_front = true;
      } else if (pc.x() > 0) {
        umax = kInf;  // wraps past the right border
      } else {
        umin = -kInf;
      }
    }
  }
  if (!any_front) return std::nullopt;
  auto clampi = [](double x, int hi) {
    return static_cast<int>(std::clamp(x, -1.0, static_cast<double>(hi) + 1.0));
  };
  PixelRect r;
  r.u0 = std::max(0, clampi(std::floor(umin), intr.width - 1));
  r.u1 = std::min(intr.width - 1, clampi(std::ceil(umax), intr.width - 1));
  r.v0 = std::max(0, clampi(std::floor(vmin), intr.height - 1));
  r.v1 = std::min(intr.height - 1, clampi(std::ceil(vmax), intr.height - 1));
  if (r.empty()) return std::nullopt;
  return r;
}

std::vector<Frontier> reconcile_frontiers(const std::vector<Frontier>& old,
                                          const std::vector<FrontierGeometry>& fresh,
                                          const GridShape& shape, int step, int& next_id,
                                          const FeatureFn& make_feature, double overlap) {
  std::unordered_map<std::size_t, std::size_t> owner;  // cell index -> old frontier slot
  for (std::size_t i = 0; i < old.size(); ++i)
    for (const auto& c : old[i].cells) owner[shape.index(c)] = i;

  struct Claim {
    std::size_t old_slot;
    std::size_t shared;
  };
  std::vector<std::optional<Claim>> claims(fresh.size());
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    std::map<std::size_t, std::size_t> counts;
    for (const auto& c : fresh[i].cells) {
      auto it = owner.find(shape.index(c));
      if (it != owner.end()) ++counts[it->second];
    }
    std::optional<Claim> best;
    for (const auto& [slot, n] : counts) {
      if (!best || n > best->shared || (n == best->shared && old[slot].id < old[best->old_slot].id))
        best = Claim{slot, n};
    }
    if (best && static_cast<double>(best->shared) >= overlap * static_cast<double>(fresh[i].cells.size()))
      claims[i] = best;
  }
  // An old id passes to at most one successor: the one sharing the most cells.
  std::vector<std::optional<std::size_t>> winner(old.size());
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    if (!claims[i]) continue;
    auto& w = winner[claims[i]->old_slot];
    if (!w || claims[i]->shared > claims[*w]->shared) w = i;
  }

  std::vector<Frontier> out;
  out.reserve(fresh.size());
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    const auto& g = fresh[i];
    Frontier f;
    f.cells = g.cells;
    f.end1 = g.end1;
    f.end2 = g.end2;
    f.center_cell = g.center;
    f.endpoint1 = shape.center_of(g.end1);
    f.endpoint2 = shape.center_of(g.end2);
    f.center = shape.center_of(g.center);
    if (claims[i] && winner[claims[i]->old_slot] == i) {
      const auto& prev = old[claims[i]->old_slot];
      f.id = prev.id;
      f.birth_step = prev.birth_step;
      f.feature = prev.feature;
    } else {
      f.id = next_id++;
      f.birth_step = step;
      if (make_feature) f.feature = make_feature(g);
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace fomnav::mapping
