#pragma once

// High-level goal selection: egocentric snapshots, the policy interface,
// nearest-frontier and oracle policies, a deterministic stand-in for the
// learned token encoders, and the two-phase selection head.

#include <Eigen/Core>
#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fomnav/goal.hpp"
#include "fomnav/mapping.hpp"

namespace fomnav::policy {

using geometry::Vec2;
using geometry::Vec3;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct FrontierRecord {
  int id = -1;
  Vec2 center = Vec2::Zero();
  std::array<double, 4> endpoints{};  // x1, y1, x2, y2
  double dist = kInf;
  std::vector<double> feature;

  bool operator==(const FrontierRecord&) const = default;
};

struct ObjectRecord {
  int id = -1;
  Vec3 center = Vec3::Zero();
  std::array<double, 24> bbox{};  // 8 corners, xyz each
  double dist = kInf;
  std::string top_category;
  std::vector<double> category_dist;
  std::vector<double> feature;

  bool operator==(const ObjectRecord&) const = default;
};

/// Everything a policy sees, in the agent frame (x forward, y left, z up).
struct PolicySnapshot {
  int step = 0;
  std::string target;
  std::vector<FrontierRecord> frontiers;
  std::vector<ObjectRecord> objects;
  std::vector<Vec2> path;

  bool has_frontier(int id) const;
  bool has_object(int id) const;
  bool operator==(const PolicySnapshot&) const = default;
};

/// World point to the agent frame at (position, heading).
Vec2 to_egocentric(const Vec2& world, const Vec2& position, double heading_deg);

/// Uniform-in-time subsample keeping the first and last entries.
std::vector<Vec2> subsample_path(std::span<const Vec2> path, std::size_t max_points);

PolicySnapshot make_snapshot(const mapping::FrontierObjectMap& map, const Vec2& position,
                             double heading_deg, const std::string& target,
                             std::span<const std::string> categories, std::size_t max_path = 50);

/// Ground truth handed to privileged policies only.
struct OracleContext {
  const mapping::FrontierObjectMap* map = nullptr;
  std::vector<Vec2> gt_stops;                          // stopping viewpoints of all targets
  std::vector<std::pair<Vec2, Vec2>> target_footprints;  // (min, max) xy of target instances
  std::vector<int> excluded_objects;                   // temporarily unreachable
  int min_points = 4;
  double footprint_overlap = 0.5;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual GoalChoice select(const PolicySnapshot& snap, const OracleContext* privileged) = 0;
};

/// Object with the target as top category (nearest, then lowest id), else the
/// nearest frontier (lowest id on ties). Throws NoGoal.
GoalChoice nearest_frontier_choice(const PolicySnapshot& snap);

/// Visible target object if any; else the frontier minimizing the mean of
/// its agent distance and its distance to the nearest ground-truth stop.
/// `stop_dist` is indexed like `snap.frontiers`. Throws DeadEnd.
GoalChoice oracle_choice(const PolicySnapshot& snap, std::span<const double> stop_dist,
                         std::optional<int> visible_target);

/// Map object matching a ground-truth target instance: at least `min_points`
/// points and footprint overlap with a (one-cell dilated) target footprint of
/// at least `overlap`. Highest overlap wins, then lowest id.
std::optional<int> visible_target_object(const mapping::FrontierObjectMap& map,
                                         std::span<const std::pair<Vec2, Vec2>> target_footprints,
                                         int min_points, double overlap,
                                         std::span<const int> exclude = {});

class NearestFrontierPolicy : public Policy {
 public:
  std::string name() const override { return "nearest-frontier"; }
  GoalChoice select(const PolicySnapshot& snap, const OracleContext*) override {
    return nearest_frontier_choice(snap);
  }
};

class OraclePolicy : public Policy {
 public:
  std::string name() const override { return "oracle"; }
  GoalChoice select(const PolicySnapshot& snap, const OracleContext* privileged) override;
};

/// Deterministic per-field pseudo-encoder. Each field maps its quantized
/// values through a seeded hash to a D-vector; token embeddings are sums of
/// field vectors plus a type vector. Coordinates and distances are divided
/// by `tau` first.
class StubEmbedder {
 public:
  explicit StubEmbedder(int dim = 64, std::uint64_t seed = 0x5eedULL, double tau = 10.0,
                        double quantum = 0.01);

  int dim() const { return dim_; }
  double tau() const { return tau_; }

  /// Raw field vector for already-scaled values. +inf maps to a reserved bucket.
  VectorXd field(const std::string& name, std::span<const double> values) const;
  VectorXd type_vector(const std::string& name) const;
  VectorXd text(const std::string& s) const;

  VectorXd frontier_center(const FrontierRecord& f) const;
  VectorXd frontier_ends(const FrontierRecord& f) const;
  VectorXd frontier_vis(const FrontierRecord& f) const;
  VectorXd frontier_dist(const FrontierRecord& f) const;
  VectorXd frontier(const FrontierRecord& f) const;

  VectorXd object_center(const ObjectRecord& o) const;
  VectorXd object_corners(const ObjectRecord& o) const;
  VectorXd object_dist(const ObjectRecord& o) const;
  VectorXd object_vis(const ObjectRecord& o) const;
  VectorXd object_cat(const ObjectRecord& o) const;
  VectorXd object(const ObjectRecord& o) const;

  VectorXd path_point(const Vec2& p) const;

  /// Visual stand-in: mean of category text vectors weighted by `histogram`
  /// plus a depth term; used as the frontier / object visual feature.
  std::vector<double> visual(std::span<const double> histogram, std::span<const std::string> categories,
                             double mean_depth) const;

 private:
  int dim_;
  std::uint64_t seed_;
  double tau_;
  double quantum_;
};

/// Two-phase head: a linear frontier/object classifier on the next-token
/// embedding, then S = e^T (A^T A) E. A is stored as D' x D.
struct SelectionHead {
  MatrixXd A;
  VectorXd type_w;
  double type_b = 0;

  int dim() const { return static_cast<int>(A.cols()); }
  double type_logit(const VectorXd& e_next) const { return type_w.dot(e_next) + type_b; }
  /// Similarity of `e_next` with each row of `candidates`.
  VectorXd similarity(const VectorXd& e_next, const MatrixXd& candidates) const;

  static SelectionHead identity(int dim);
  static SelectionHead random(int dim, int dim_out, std::uint64_t seed);
  void validate() const;
};

/// Positive type logit selects objects. Falls through to the other kind when
/// the classified kind has no candidates; ties go to the lowest id.
GoalChoice head_select(const SelectionHead& head, const VectorXd& e_next,
                       const MatrixXd& frontier_embs, std::span<const int> frontier_ids,
                       const MatrixXd& object_embs, std::span<const int> object_ids);

/// BCE(type) + lambda * CE(softmax(sel_logits), sel_label). type_label 1 = object.
double head_loss(double type_logit, int type_label, const VectorXd& sel_logits, int sel_label,
                 double lambda = 0.5);

struct HeadSample {
  VectorXd e_next;
  MatrixXd candidates;  // rows of the labelled kind
  int type_label = 0;
  int sel_label = 0;
};

double batch_loss(const SelectionHead& head, std::span<const HeadSample> batch, double lambda = 0.5);
/// Central-difference gradient of batch_loss with respect to A.
MatrixXd numeric_grad_A(const SelectionHead& head, std::span<const HeadSample> batch, double lambda = 0.5,
                        double eps = 1e-6);

SelectionHead load_head(const std::string& path);
void save_head(const SelectionHead& head, const std::string& path);

/// Selection head over stub embeddings; the next-token vector is the text
/// vector of the target category.
class HeadPolicy : public Policy {
 public:
  HeadPolicy(SelectionHead head, StubEmbedder embedder);
  std::string name() const override { return "head"; }
  GoalChoice select(const PolicySnapshot& snap, const OracleContext*) override;

 private:
  SelectionHead head_;
  StubEmbedder embedder_;
};

}  // namespace fomnav::policy
