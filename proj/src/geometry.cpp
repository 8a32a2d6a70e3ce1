#include "fomnav/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace fomnav::geometry {

CameraIntrinsics CameraIntrinsics::from_hfov(int width, int height, double hfov_deg,
                                             double max_range) {
  CameraIntrinsics c;
  c.width = width;
  c.height = height;
  c.cx = width / 2;
  c.cy = height / 2;
  c.fx = (width / 2.0) / std::tan(deg2rad(hfov_deg) / 2.0);
  c.fy = c.fx;
  c.max_range = max_range;
  c.validate();
  return c;
}

double CameraIntrinsics::vfov_rad() const {
  return std::atan(cy / fy) + std::atan((height - 1 - cy) / fy);
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0) || width <= 0 || height <= 0 || !(cx >= 0) || !(cx < width) ||
      !(cy >= 0) || !(cy < height) || !(max_range > 0)) {
    std::ostringstream ss;
    ss << "invalid intrinsics: fx=" << fx << " fy=" << fy << " cx=" << cx << " cy=" << cy
       << " size=" << width << "x" << height << " max_range=" << max_range;
    throw InvalidInput(ss.str());
  }
}

Pose Pose::from_agent(double x, double y, double heading_deg, double height) {
  const double th = deg2rad(heading_deg);
  const Vec3 forward(std::cos(th), std::sin(th), 0.0);
  const Vec3 right(std::sin(th), -std::cos(th), 0.0);
  const Vec3 down(0.0, 0.0, -1.0);
  Pose p;
  p.rotation.col(0) = right;
  p.rotation.col(1) = down;
  p.rotation.col(2) = forward;
  p.translation = Vec3(x, y, height);
  return p;
}

bool Pose::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

double PointCloud::total_weight() const {
  if (weights.empty()) return static_cast<double>(points.size());
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

Vec3 PointCloud::centroid() const {
  if (points.empty()) throw InvalidInput("centroid of empty cloud");
  Vec3 sum = Vec3::Zero();
  double wsum = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum += weight(i) * points[i];
    wsum += weight(i);
  }
  return sum / wsum;
}

void PointCloud::validate() const {
  if (!weights.empty() && weights.size() != points.size())
    throw InvalidInput("point cloud weights do not match point count");
  for (const auto& p : points)
    if (!p.allFinite()) throw InvalidInput("non-finite point in cloud");
  for (double w : weights)
    if (!(w > 0)) throw InvalidInput("non-positive point weight");
}

bool valid_depth(double d, const CameraIntrinsics& intr) {
  return d > 0.0 && d < intr.max_range && std::isfinite(d);
}

std::optional<PixelProjection> project(const Vec3& p_world, const CameraIntrinsics& intr,
                                       const Pose& pose) {
  const Vec3 pc = pose.to_camera(p_world);
  if (pc.z() <= 1e-9) return std::nullopt;
  return PixelProjection{intr.fx * pc.x() / pc.z() + intr.cx, intr.fy * pc.y() / pc.z() + intr.cy,
                         pc.z()};
}

PointCloud backproject_depth(const DepthImage& depth, const CameraIntrinsics& intr,
                             const Pose& pose, std::optional<std::span<const int>> mask) {
  if (depth.width != intr.width || depth.height != intr.height ||
      depth.data.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    std::ostringstream ss;
    ss << "depth image " << depth.width << "x" << depth.height << " does not match intrinsics "
       << intr.width << "x" << intr.height;
    throw InvalidInput(ss.str());
  }
  PointCloud out;
  auto emit = [&](int idx) {
    const int u = idx % depth.width;
    const int v = idx / depth.width;
    const double z = depth.data[static_cast<std::size_t>(idx)];
    if (!valid_depth(z, intr)) return;
    const Vec3 pc((u - intr.cx) / intr.fx * z, (v - intr.cy) / intr.fy * z, z);
    out.points.push_back(pose.to_world(pc));
  };
  if (mask) {
    out.points.reserve(mask->size());
    const int n = depth.width * depth.height;
    for (int idx : *mask) {
      if (idx < 0 || idx >= n) throw InvalidInput("mask pixel outside image");
      emit(idx);
    }
  } else {
    out.points.reserve(depth.data.size());
    for (int idx = 0; idx < depth.width * depth.height; ++idx) emit(idx);
  }
  return out;
}

VoxelKey voxel_of(const Vec3& p, double voxel) {
  return {static_cast<std::int32_t>(std::floor(p.x() / voxel)),
          static_cast<std::int32_t>(std::floor(p.y() / voxel)),
          static_cast<std::int32_t>(std::floor(p.z() / voxel))};
}

namespace {

// Rounding in the centroid division can push a coordinate onto a voxel face;
// step it back so the centroid maps to the voxel it summarises.
Vec3 snap_into_voxel(Vec3 p, const VoxelKey& k, double voxel) {
  const std::int32_t key[3] = {k.x, k.y, k.z};
  for (int a = 0; a < 3; ++a) {
    for (int guard = 0; guard < 8; ++guard) {
      const auto idx = static_cast<std::int32_t>(std::floor(p[a] / voxel));
      if (idx == key[a]) break;
      p[a] = std::nextafter(p[a], idx > key[a] ? -kInf : kInf);
    }
  }
  return p;
}

}  // namespace

VoxelAccumulator::VoxelAccumulator(double voxel) : voxel_(voxel) {
  if (!(voxel > 0)) throw InvalidInput("voxel size must be positive");
}

bool VoxelAccumulator::add(const Vec3& p, double w) {
  auto [it, inserted] = cells_.try_emplace(voxel_of(p, voxel_));
  it->second.sum += w * p;
  it->second.weight += w;
  return inserted;
}

void VoxelAccumulator::add(const PointCloud& cloud) {
  for (std::size_t i = 0; i < cloud.size(); ++i) add(cloud.points[i], cloud.weight(i));
}

PointCloud VoxelAccumulator::cloud() const {
  std::vector<std::pair<VoxelKey, const Accum*>> items;
  items.reserve(cells_.size());
  for (const auto& [k, a] : cells_) items.emplace_back(k, &a);
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  PointCloud out;
  out.points.reserve(items.size());
  out.weights.reserve(items.size());
  for (const auto& [k, a] : items) {
    out.points.push_back(snap_into_voxel(a->sum / a->weight, k, voxel_));
    out.weights.push_back(a->weight);
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  VoxelAccumulator acc(voxel);
  acc.add(cloud);
  return acc.cloud();
}

PointHash::PointHash(std::span<const Vec3> points, double cell) : points_(points), cell_(cell) {
  if (!(cell > 0)) throw InvalidInput("hash cell must be positive");
  buckets_.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    buckets_[voxel_of(points[i], cell)].push_back(static_cast<int>(i));
}

bool PointHash::any_within(const Vec3& q, double radius) const {
  const VoxelKey c = voxel_of(q, cell_);
  const double r2 = radius * radius;
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dz = -1; dz <= 1; ++dz) {
        auto it = buckets_.find({c.x + dx, c.y + dy, c.z + dz});
        if (it == buckets_.end()) continue;
        for (int idx : it->second)
          if ((points_[idx] - q).squaredNorm() < r2) return true;
      }
  return false;
}

void PointHash::within(const Vec3& q, double radius, std::vector<int>& out) const {
  out.clear();
  const VoxelKey c = voxel_of(q, cell_);
  const double r2 = radius * radius;
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dz = -1; dz <= 1; ++dz) {
        auto it = buckets_.find({c.x + dx, c.y + dy, c.z + dz});
        if (it == buckets_.end()) continue;
        for (int idx : it->second)
          if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
      }
}

PointCloud density_filter(const PointCloud& cloud, double eps, int min_pts) {
  if (!(eps > 0)) throw InvalidInput("density_filter: eps must be positive");
  if (min_pts < 1) throw InvalidInput("density_filter: min_pts must be >= 1");
  const std::size_t n = cloud.size();
  if (n == 0) return cloud;
  if (min_pts == 1) return cloud;

  PointHash hash(cloud.points, eps);
  std::vector<char> core(n, 0);
  std::vector<int> nbrs;
  for (std::size_t i = 0; i < n; ++i) {
    hash.within(cloud.points[i], eps, nbrs);
    core[i] = static_cast<int>(nbrs.size()) >= min_pts;
  }
  // Every cluster seeded by a core point has at least min_pts members, so a
  // point survives iff it is core or within eps of a core point.
  std::vector<char> keep(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    keep[i] = 1;
    hash.within(cloud.points[i], eps, nbrs);
    for (int j : nbrs) keep[j] = 1;
  }
  PointCloud out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    out.points.push_back(cloud.points[i]);
    if (cloud.has_weights()) out.weights.push_back(cloud.weights[i]);
  }
  return out;
}

}  // namespace fomnav::geometry
