#pragma once

// Camera model, rigid transforms, depth back-projection and point cloud
// filters (voxel grid, DBSCAN density filter).

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fomnav/common.hpp"

namespace fomnav::geometry {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics. Pixel (u, v) maps to the ray ((u - cx)/fx, (v - cy)/fy, 1)
/// in the camera frame (x right, y down, z forward).
struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;
  double max_range = 5.0;

  /// Square pixels, principal point at (width/2, height/2).
  static CameraIntrinsics from_hfov(int width, int height, double hfov_deg,
                                    double max_range);

  double vfov_rad() const;
  void validate() const;
};

struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  /// Level camera at (x, y, height) looking along `heading_deg` (CCW from +x).
  static Pose from_agent(double x, double y, double heading_deg, double height);

  Vec3 to_world(const Vec3& p_cam) const { return rotation * p_cam + translation; }
  Vec3 to_camera(const Vec3& p_world) const {
    return rotation.transpose() * (p_world - translation);
  }
  bool is_valid(double tol = 1e-9) const;
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<double> weights;  // empty, or one positive weight per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_weights() const { return !weights.empty(); }
  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
  double total_weight() const;
  Vec3 centroid() const;
  void validate() const;
};

/// Row-major z-depth image. 0 marks an invalid pixel; values at or beyond
/// the camera max_range are no-return readings.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  DepthImage() = default;
  DepthImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  double& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
};

struct PixelProjection {
  double u = 0, v = 0, depth = 0;
};

/// Projects a world point; nullopt when behind the camera.
std::optional<PixelProjection> project(const Vec3& p_world, const CameraIntrinsics& intr,
                                       const Pose& pose);

bool valid_depth(double d, const CameraIntrinsics& intr);

/// One world-frame point per valid pixel (restricted to `mask` when given;
/// mask entries are linear pixel indices v * width + u).
PointCloud backproject_depth(const DepthImage& depth, const CameraIntrinsics& intr,
                             const Pose& pose,
                             std::optional<std::span<const int>> mask = std::nullopt);

struct VoxelKey {
  std::int32_t x = 0, y = 0, z = 0;
  auto operator<=>(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = mix64(static_cast<std::uint32_t>(k.x));
    h = hash_combine(h, static_cast<std::uint32_t>(k.y));
    return hash_combine(h, static_cast<std::uint32_t>(k.z));
  }
};

VoxelKey voxel_of(const Vec3& p, double voxel);

/// Weighted-centroid voxel accumulator anchored at the world origin. Each
/// occupied voxel keeps the sum of its members so clouds can be merged
/// incrementally.
class VoxelAccumulator {
 public:
  explicit VoxelAccumulator(double voxel);

  /// Returns true if the point opened a previously empty voxel.
  bool add(const Vec3& p, double w = 1.0);
  void add(const PointCloud& cloud);

  double voxel() const { return voxel_; }
  std::size_t size() const { return cells_.size(); }
  bool contains(const VoxelKey& k) const { return cells_.count(k) != 0; }

  /// Centroids sorted by voxel key; weights hold member weight sums.
  PointCloud cloud() const;

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [key, acc] : cells_) fn(key, acc.sum / acc.weight, acc.weight);
  }

 private:
  struct Accum {
    Vec3 sum = Vec3::Zero();
    double weight = 0;
  };
  double voxel_;
  std::unordered_map<VoxelKey, Accum, VoxelKeyHash> cells_;
};

/// One centroid per occupied voxel; weights are carried through as sums.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// DBSCAN core + border points; noise points are dropped. Input order is
/// preserved. Neighbourhoods are closed balls of radius eps and include the
/// point itself.
PointCloud density_filter(const PointCloud& cloud, double eps, int min_pts);

/// Fixed-radius neighbour lookup over a point set.
class PointHash {
 public:
  PointHash(std::span<const Vec3> points, double cell);
  /// True if some indexed point lies strictly closer than `radius` (radius <= cell).
  bool any_within(const Vec3& q, double radius) const;
  /// Indices of points within the closed ball (radius <= cell).
  void within(const Vec3& q, double radius, std::vector<int>& out) const;

 private:
  std::span<const Vec3> points_;
  double cell_;
  std::unordered_map<VoxelKey, std::vector<int>, VoxelKeyHash> buckets_;
};

}  // namespace fomnav::geometry
