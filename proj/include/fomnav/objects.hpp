#pragma once

// 3D object map: per-segment point clouds, overlap-based instance merging
// with chained merges, and accumulated category / feature averages.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "fomnav/geometry.hpp"
#include "fomnav/grid.hpp"

namespace fomnav::objects {

using geometry::PointCloud;
using geometry::Vec2;
using geometry::Vec3;

struct ObjectConfig {
  double voxel = 0.05;
  double dbscan_eps = 0.10;
  int dbscan_min_pts = 4;
  double merge_delta = 0.03;
  double merge_ratio = 0.5;
  // Mask filters, in pixels for the configured image size.
  int min_mask_pixels = 100;
  int border_top_bottom = 30;
  int border_left_right = 20;
  /// Scales the pixel thresholds from a 640x480 reference to another size.
  ObjectConfig scaled_to(int width, int height) const;
};

struct SegmentMask {
  std::vector<int> pixels;  // linear indices v * width + u
  std::vector<double> category_dist;
  std::vector<double> feature;

  double confidence() const;
  void validate() const;
};

struct ObjectInstance {
  int id = -1;
  PointCloud cloud;  // voxel centroids, weights = accumulated point counts
  std::vector<double> category_dist;
  std::vector<double> feature;
  double weight = 0;
  Vec3 center = Vec3::Zero();
  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_max = Vec3::Zero();
  std::array<Vec3, 8> bbox_corners{};
  double geodesic_dist = kInf;
  std::vector<Vec2> observers;  // agent positions the object was seen from
  int last_seen_step = -1;

  int top_category() const;
  void refresh_bounds();
  void add_observer(const Vec2& p);
};

struct ObjectStore {
  std::vector<ObjectInstance> objects;
  int next_id = 0;

  ObjectInstance* find(int id);
  const ObjectInstance* find(int id) const;
};

/// True if the mask passes the size and border filters.
bool mask_accepted(const SegmentMask& m, int width, int height, const ObjectConfig& cfg);

/// One candidate (id = -1) per accepted mask whose filtered cloud is non-empty.
std::vector<ObjectInstance> ingest_segments(std::span<const SegmentMask> masks,
                                            const geometry::DepthImage& depth,
                                            const geometry::CameraIntrinsics& intr,
                                            const geometry::Pose& pose, const ObjectConfig& cfg);

/// (fraction of a within delta of b, fraction of b within delta of a); strict "<".
std::pair<double, double> overlap_ratio(const PointCloud& a, const PointCloud& b, double delta);

/// Builds a candidate instance (bounds, weight) from a cloud and its labels.
ObjectInstance make_candidate(PointCloud cloud, std::vector<double> category_dist,
                              std::vector<double> feature);

/// Merges `candidate` into the store and chases chained merges to a fixpoint.
/// Returns the id of the object that holds the candidate afterwards.
int merge_step(ObjectStore& store, ObjectInstance candidate, const ObjectConfig& cfg);

/// Cells of the axis-aligned rectangle spanned by the cloud on the ground plane.
std::vector<Cell> footprint_cells(const ObjectInstance& obj, const GridShape& shape);

/// Recomputes centers, bounds and geodesic distances from `agent_field`
/// (the geodesic field from the agent cell).
void refresh_object_geometry(ObjectStore& store, const OccupancyGrid& grid,
                             const CollisionMap& collision, const DistanceField& agent_field);

}  // namespace fomnav::objects
