#include "fomnav/objects.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_set>

namespace fomnav::objects {

ObjectConfig ObjectConfig::scaled_to(int width, int height) const {
  ObjectConfig c = *this;
  const double sx = width / 640.0;
  const double sy = height / 480.0;
  c.min_mask_pixels = std::max(1, static_cast<int>(std::lround(min_mask_pixels * sx * sy)));
  c.border_top_bottom = static_cast<int>(std::lround(border_top_bottom * sy));
  c.border_left_right = static_cast<int>(std::lround(border_left_right * sx));
  return c;
}

double SegmentMask::confidence() const {
  if (category_dist.empty()) return 0.0;
  return *std::max_element(category_dist.begin(), category_dist.end());
}

void SegmentMask::validate() const {
  if (pixels.empty()) throw InvalidInput("segment mask has no pixels");
  if (category_dist.empty()) throw InvalidInput("segment mask has no category distribution");
  double s = 0;
  for (double p : category_dist) {
    if (!(p >= 0)) throw InvalidInput("negative category probability");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-6) throw InvalidInput("category distribution does not sum to 1");
}

int ObjectInstance::top_category() const {
  if (category_dist.empty()) return -1;
  return static_cast<int>(std::max_element(category_dist.begin(), category_dist.end()) -
                          category_dist.begin());
}

void ObjectInstance::refresh_bounds() {
  if (cloud.empty()) return;
  center = cloud.centroid();
  bbox_min = cloud.points.front();
  bbox_max = cloud.points.front();
  for (const auto& p : cloud.points) {
    bbox_min = bbox_min.cwiseMin(p);
    bbox_max = bbox_max.cwiseMax(p);
  }
  for (int i = 0; i < 8; ++i) {
    bbox_corners[i] = Vec3((i & 1) ? bbox_max.x() : bbox_min.x(), (i & 2) ? bbox_max.y() : bbox_min.y(),
                           (i & 4) ? bbox_max.z() : bbox_min.z());
  }
}

void ObjectInstance::add_observer(const Vec2& p) {
  for (const auto& o : observers)
    if ((o - p).squaredNorm() < 0.05 * 0.05) return;
  observers.push_back(p);
}

ObjectInstance* ObjectStore::find(int id) {
  for (auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

const ObjectInstance* ObjectStore::find(int id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

bool mask_accepted(const SegmentMask& m, int width, int height, const ObjectConfig& cfg) {
  if (static_cast<int>(m.pixels.size()) < cfg.min_mask_pixels) return false;
  for (int idx : m.pixels) {
    const int u = idx % width;
    const int v = idx / width;
    if (v < cfg.border_top_bottom || v >= height - cfg.border_top_bottom) return false;
    if (u < cfg.border_left_right || u >= width - cfg.border_left_right) return false;
  }
  return true;
}

ObjectInstance make_candidate(PointCloud cloud, std::vector<double> category_dist,
                              std::vector<double> feature) {
  ObjectInstance c;
  c.cloud = std::move(cloud);
  c.category_dist = std::move(category_dist);
  c.feature = std::move(feature);
  c.weight = c.cloud.total_weight();
  c.refresh_bounds();
  return c;
}

std::vector<ObjectInstance> ingest_segments(std::span<const SegmentMask> masks,
                                            const geometry::DepthImage& depth,
                                            const geometry::CameraIntrinsics& intr,
                                            const geometry::Pose& pose, const ObjectConfig& cfg) {
  std::vector<ObjectInstance> out;
  for (const auto& m : masks) {
    m.validate();
    if (!mask_accepted(m, intr.width, intr.height, cfg)) continue;
    auto raw = geometry::backproject_depth(depth, intr, pose, std::span<const int>(m.pixels));
    auto dense = geometry::density_filter(raw, cfg.dbscan_eps, cfg.dbscan_min_pts);
    if (dense.empty()) continue;
    out.push_back(make_candidate(geometry::voxel_downsample(dense, cfg.voxel), m.category_dist,
                                 m.feature));
  }
  return out;
}

std::pair<double, double> overlap_ratio(const PointCloud& a, const PointCloud& b, double delta) {
  if (a.empty() || b.empty()) throw InvalidInput("overlap_ratio: empty cloud");
  if (!(delta > 0)) throw InvalidInput("overlap_ratio: delta must be positive");
  auto fraction = [delta](const PointCloud& from, const PointCloud& to) {
    geometry::PointHash hash(to.points, delta);
    std::size_t hit = 0;
    for (const auto& p : from.points) hit += hash.any_within(p, delta);
    return static_cast<double>(hit) / static_cast<double>(from.size());
  };
  return {fraction(a, b), fraction(b, a)};
}

namespace {

std::vector<double> weighted_mix(const std::vector<double>& a, double wa, const std::vector<double>& b,
                                 double wb) {
  if (a.empty()) return b;
  if (b.empty() || a.size() != b.size()) return a;
  std::vector<double> out(a.size());
  const double s = wa + wb;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (wa * a[i] + wb * b[i]) / s;
  return out;
}

// Folds `src` into `dst`; the survivor keeps the older (smaller) id.
void absorb(ObjectInstance& dst, const ObjectInstance& src, double voxel) {
  dst.category_dist = weighted_mix(dst.category_dist, dst.weight, src.category_dist, src.weight);
  dst.feature = weighted_mix(dst.feature, dst.weight, src.feature, src.weight);
  geometry::VoxelAccumulator acc(voxel);
  acc.add(dst.cloud);
  acc.add(src.cloud);
  dst.cloud = acc.cloud();
  dst.weight += src.weight;
  for (const auto& o : src.observers) dst.add_observer(o);
  dst.last_seen_step = std::max(dst.last_seen_step, src.last_seen_step);
  if (src.id >= 0 && (dst.id < 0 || src.id < dst.id)) dst.id = src.id;
  dst.refresh_bounds();
}

bool should_merge(const ObjectInstance& a, const ObjectInstance& b, const ObjectConfig& cfg) {
  // Clouds farther apart than their bounding boxes plus delta cannot overlap.
  const Vec3 gap = (a.bbox_min - b.bbox_max).cwiseMax(b.bbox_min - a.bbox_max);
  if (gap.maxCoeff() >= cfg.merge_delta) return false;
  const auto [ra, rb] = overlap_ratio(a.cloud, b.cloud, cfg.merge_delta);
  return std::max(ra, rb) > cfg.merge_ratio;
}

std::vector<std::size_t> by_centroid_distance(const ObjectStore& store, const Vec3& c,
                                              std::size_t skip = static_cast<std::size_t>(-1)) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < store.objects.size(); ++i)
    if (i != skip) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double da = (store.objects[a].center - c).squaredNorm();
    const double db = (store.objects[b].center - c).squaredNorm();
    if (da != db) return da < db;
    return store.objects[a].id < store.objects[b].id;
  });
  return order;
}

}  // namespace

int merge_step(ObjectStore& store, ObjectInstance candidate, const ObjectConfig& cfg) {
  if (candidate.cloud.empty()) throw InvalidInput("merge_step: empty candidate");
  candidate.weight = candidate.cloud.total_weight();
  candidate.refresh_bounds();

  std::size_t holder = store.objects.size();
  for (std::size_t i : by_centroid_distance(store, candidate.center)) {
    if (should_merge(candidate, store.objects[i], cfg)) {
      candidate.id = -1;
      absorb(store.objects[i], candidate, cfg.voxel);
      holder = i;
      break;
    }
  }
  if (holder == store.objects.size()) {
    candidate.id = store.next_id++;
    store.objects.push_back(std::move(candidate));
    return store.objects.back().id;
  }

  // A merged object may now bridge objects that were separate before.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t j : by_centroid_distance(store, store.objects[holder].center, holder)) {
      if (!should_merge(store.objects[holder], store.objects[j], cfg)) continue;
      ObjectInstance other = std::move(store.objects[j]);
      absorb(store.objects[holder], other, cfg.voxel);
      store.objects.erase(store.objects.begin() + static_cast<std::ptrdiff_t>(j));
      if (j < holder) --holder;
      changed = true;
      break;
    }
  }
  return store.objects[holder].id;
}

std::vector<Cell> footprint_cells(const ObjectInstance& obj, const GridShape& shape) {
  if (obj.cloud.empty()) return {};
  Vec2 lo = obj.cloud.points.front().head<2>(), hi = lo;
  for (const auto& p : obj.cloud.points) {
    lo = lo.cwiseMin(p.head<2>());
    hi = hi.cwiseMax(p.head<2>());
  }
  const CellBox box = shape.clip({shape.cell_of(lo).row, shape.cell_of(lo).col, shape.cell_of(hi).row,
                                  shape.cell_of(hi).col});
  std::vector<Cell> cells;
  for (int r = box.r0; r <= box.r1; ++r)
    for (int c = box.c0; c <= box.c1; ++c) cells.push_back({r, c});
  return cells;
}

void refresh_object_geometry(ObjectStore& store, const OccupancyGrid& grid,
                             const CollisionMap& collision, const DistanceField& agent_field) {
  const auto& shape = grid.shape();
  const int max_hops = static_cast<int>(std::ceil(grid.inflation_radius() / shape.resolution)) + 2;
  auto navigable = [&](const Cell& c) { return !grid.is_inflated(c) && !collision.blocked(c); };

  for (auto& obj : store.objects) {
    obj.refresh_bounds();
    // Walk outward through the non-navigable shell around the footprint and
    // take the best field value among the first navigable cells reached.
    std::unordered_set<Cell, CellHash> seen;
    std::deque<std::pair<Cell, int>> queue;
    for (const auto& c : footprint_cells(obj, shape)) {
      seen.insert(c);
      queue.emplace_back(c, 0);
    }
    double best = kInf;
    while (!queue.empty()) {
      const auto [c, hops] = queue.front();
      queue.pop_front();
      for (const auto& d : kNeighbors8) {
        const Cell n{c.row + d[0], c.col + d[1]};
        if (!shape.in_bounds(n) || !seen.insert(n).second) continue;
        if (navigable(n)) {
          best = std::min(best, agent_field.at(n));
        } else if (hops + 1 < max_hops) {
          queue.emplace_back(n, hops + 1);
        }
      }
    }
    obj.geodesic_dist = best;
  }
}

}  // namespace fomnav::objects
