#include "fomnav/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "fomnav/planning.hpp"

namespace fomnav::policy {

bool PolicySnapshot::has_frontier(int id) const {
  return std::any_of(frontiers.begin(), frontiers.end(), [id](const auto& f) { return f.id == id; });
}

bool PolicySnapshot::has_object(int id) const {
  return std::any_of(objects.begin(), objects.end(), [id](const auto& o) { return o.id == id; });
}

Vec2 to_egocentric(const Vec2& world, const Vec2& position, double heading_deg) {
  const double a = deg2rad(heading_deg);
  const double c = std::cos(a), s = std::sin(a);
  const Vec2 d = world - position;
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

std::vector<Vec2> subsample_path(std::span<const Vec2> path, std::size_t max_points) {
  if (path.size() <= max_points || max_points == 0) return {path.begin(), path.end()};
  if (max_points == 1) return {path.back()};
  std::vector<Vec2> out;
  out.reserve(max_points);
  const double span = static_cast<double>(path.size() - 1);
  for (std::size_t i = 0; i < max_points; ++i) {
    const auto k = static_cast<std::size_t>(std::llround(span * static_cast<double>(i) / (max_points - 1)));
    out.push_back(path[k]);
  }
  return out;
}

PolicySnapshot make_snapshot(const mapping::FrontierObjectMap& map, const Vec2& position,
                             double heading_deg, const std::string& target,
                             std::span<const std::string> categories, std::size_t max_path) {
  PolicySnapshot s;
  s.step = map.step;
  s.target = target;
  auto ego = [&](const Vec2& p) { return to_egocentric(p, position, heading_deg); };
  for (const auto& f : map.frontiers) {
    FrontierRecord r;
    r.id = f.id;
    r.center = ego(f.center);
    const Vec2 e1 = ego(f.endpoint1), e2 = ego(f.endpoint2);
    r.endpoints = {e1.x(), e1.y(), e2.x(), e2.y()};
    r.dist = f.geodesic_dist;
    r.feature = f.feature;
    s.frontiers.push_back(std::move(r));
  }
  for (const auto& o : map.objects.objects) {
    ObjectRecord r;
    r.id = o.id;
    const Vec2 c = ego(o.center.head<2>());
    r.center = Vec3(c.x(), c.y(), o.center.z());
    for (int i = 0; i < 8; ++i) {
      const Vec2 p = ego(o.bbox_corners[static_cast<std::size_t>(i)].head<2>());
      r.bbox[static_cast<std::size_t>(3 * i)] = p.x();
      r.bbox[static_cast<std::size_t>(3 * i + 1)] = p.y();
      r.bbox[static_cast<std::size_t>(3 * i + 2)] = o.bbox_corners[static_cast<std::size_t>(i)].z();
    }
    r.dist = o.geodesic_dist;
    const int top = o.top_category();
    r.top_category = top >= 0 && top < static_cast<int>(categories.size()) ? categories[static_cast<std::size_t>(top)]
                                                                             : std::string("unknown");
    r.category_dist = o.category_dist;
    r.feature = o.feature;
    s.objects.push_back(std::move(r));
  }
  for (const auto& p : subsample_path(map.path_history, max_path)) s.path.push_back(ego(p));
  return s;
}

namespace {

// Strict weak order on (distance, id) with +inf largest.
template <class R>
bool closer(const R& a, const R& b) {
  if (a.dist != b.dist) return a.dist < b.dist;
  return a.id < b.id;
}

}  // namespace

GoalChoice nearest_frontier_choice(const PolicySnapshot& snap) {
  const ObjectRecord* obj = nullptr;
  for (const auto& o : snap.objects)
    if (o.top_category == snap.target && (!obj || closer(o, *obj))) obj = &o;
  if (obj) return {GoalKind::Object, obj->id};
  const FrontierRecord* best = nullptr;
  for (const auto& f : snap.frontiers)
    if (!best || closer(f, *best)) best = &f;
  if (!best) throw NoGoal("no frontier and no object of the target category");
  return {GoalKind::Frontier, best->id};
}

GoalChoice oracle_choice(const PolicySnapshot& snap, std::span<const double> stop_dist,
                         std::optional<int> visible_target) {
  if (visible_target) return {GoalKind::Object, *visible_target};
  if (stop_dist.size() != snap.frontiers.size()) throw InvalidInput("oracle_choice: stop distances mismatch");
  int best = -1;
  double best_score = kInf;
  for (std::size_t i = 0; i < snap.frontiers.size(); ++i) {
    const auto& f = snap.frontiers[i];
    if (!std::isfinite(f.dist) || !std::isfinite(stop_dist[i])) continue;
    const double score = 0.5 * (f.dist + stop_dist[i]);
    if (best < 0 || score < best_score || (score == best_score && f.id < best)) {
      best = f.id;
      best_score = score;
    }
  }
  if (best < 0) throw DeadEnd("no reachable frontier and target not visible");
  return {GoalKind::Frontier, best};
}

std::optional<int> visible_target_object(const mapping::FrontierObjectMap& map,
                                         std::span<const std::pair<Vec2, Vec2>> target_footprints,
                                         int min_points, double overlap,
                                         std::span<const int> exclude) {
  const auto& shape = map.grid.shape();
  std::vector<CellBox> boxes;
  for (const auto& [lo, hi] : target_footprints) {
    CellBox b;
    b.expand(shape.cell_of(lo));
    b.expand(shape.cell_of(hi));
    boxes.push_back(b.dilated(1));
  }
  std::optional<int> best;
  double best_ratio = -1;
  for (const auto& o : map.objects.objects) {
    if (static_cast<int>(o.cloud.size()) < min_points) continue;
    if (std::find(exclude.begin(), exclude.end(), o.id) != exclude.end()) continue;
    const auto cells = objects::footprint_cells(o, shape);
    if (cells.empty()) continue;
    for (const auto& b : boxes) {
      const auto inside = std::count_if(cells.begin(), cells.end(), [&](const Cell& c) { return b.contains(c); });
      const double ratio = static_cast<double>(inside) / static_cast<double>(cells.size());
      if (ratio < overlap) continue;
      if (ratio > best_ratio || (ratio == best_ratio && o.id < *best)) {
        best = o.id;
        best_ratio = ratio;
      }
    }
  }
  return best;
}

GoalChoice OraclePolicy::select(const PolicySnapshot& snap, const OracleContext* ctx) {
  if (!ctx || !ctx->map) throw InvalidInput("oracle policy needs privileged context");
  const auto& map = *ctx->map;
  if (auto obj = visible_target_object(map, ctx->target_footprints, ctx->min_points,
                                       ctx->footprint_overlap, ctx->excluded_objects))
    return oracle_choice(snap, {}, obj);

  std::vector<double> stop_dist(snap.frontiers.size(), kInf);
  const auto& shape = map.grid.shape();
  std::vector<Cell> sources;
  CellBox roi = map.grid.known_box();
  for (const auto& p : ctx->gt_stops) {
    const Cell c = shape.cell_of(p);
    if (!shape.in_bounds(c)) continue;
    sources.push_back(c);
    roi.expand(c);
  }
  if (!sources.empty()) {
    planning::FmmOptions opt;
    opt.roi = shape.clip(roi.dilated(4));
    try {
      const auto field = planning::fmm_field(map, sources, opt);
      for (std::size_t i = 0; i < snap.frontiers.size(); ++i) {
        const auto* f = map.find_frontier(snap.frontiers[i].id);
        if (f) stop_dist[i] = field.at(f->center_cell);
      }
    } catch (const UnreachableSource&) {
    }
  }
  return oracle_choice(snap, stop_dist, std::nullopt);
}

// ---------------------------------------------------------------------------

StubEmbedder::StubEmbedder(int dim, std::uint64_t seed, double tau, double quantum)
    : dim_(dim), seed_(seed), tau_(tau), quantum_(quantum) {
  if (dim <= 0) throw InvalidInput("embedding dimension must be positive");
  if (!(tau > 0) || !(quantum > 0)) throw InvalidInput("tau and quantum must be positive");
}

VectorXd StubEmbedder::field(const std::string& name, std::span<const double> values) const {
  std::uint64_t h = hash_combine(seed_, fnv1a(name));
  for (double v : values) {
    std::uint64_t q;
    if (std::isinf(v)) {
      q = v > 0 ? 0x7fffffffffffffffULL : 0x8000000000000001ULL;
    } else {
      q = static_cast<std::uint64_t>(static_cast<std::int64_t>(std::llround(v / quantum_)));
    }
    h = hash_combine(h, q);
  }
  VectorXd out(dim_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
  for (int i = 0; i < dim_; ++i) {
    const std::uint64_t x = mix64(h + static_cast<std::uint64_t>(i));
    out[i] = (static_cast<double>(x >> 11) * 0x1.0p-53 * 2.0 - 1.0) * scale;
  }
  return out;
}

VectorXd StubEmbedder::type_vector(const std::string& name) const { return field("type:" + name, {}); }
VectorXd StubEmbedder::text(const std::string& s) const { return field("text:" + s, {}); }

VectorXd StubEmbedder::frontier_center(const FrontierRecord& f) const {
  const double v[2] = {f.center.x() / tau_, f.center.y() / tau_};
  return field("F.center", v);
}
VectorXd StubEmbedder::frontier_ends(const FrontierRecord& f) const {
  double v[4];
  for (int i = 0; i < 4; ++i) v[i] = f.endpoints[static_cast<std::size_t>(i)] / tau_;
  return field("F.ends", v);
}
VectorXd StubEmbedder::frontier_vis(const FrontierRecord& f) const { return field("F.vis", f.feature); }
VectorXd StubEmbedder::frontier_dist(const FrontierRecord& f) const {
  const double v[1] = {f.dist / tau_};
  return field("F.dist", v);
}
VectorXd StubEmbedder::frontier(const FrontierRecord& f) const {
  return frontier_center(f) + frontier_ends(f) + frontier_vis(f) + frontier_dist(f) + type_vector("F");
}

VectorXd StubEmbedder::object_center(const ObjectRecord& o) const {
  const double v[3] = {o.center.x() / tau_, o.center.y() / tau_, o.center.z() / tau_};
  return field("O.center", v);
}
VectorXd StubEmbedder::object_corners(const ObjectRecord& o) const {
  double v[24];
  for (int i = 0; i < 24; ++i) v[i] = o.bbox[static_cast<std::size_t>(i)] / tau_;
  return field("O.corners", v);
}
VectorXd StubEmbedder::object_dist(const ObjectRecord& o) const {
  const double v[1] = {o.dist / tau_};
  return field("O.dist", v);
}
VectorXd StubEmbedder::object_vis(const ObjectRecord& o) const { return field("O.vis", o.feature); }
VectorXd StubEmbedder::object_cat(const ObjectRecord& o) const { return field("O.cat", o.category_dist); }
VectorXd StubEmbedder::object(const ObjectRecord& o) const {
  return object_center(o) + object_corners(o) + object_dist(o) + object_vis(o) + object_cat(o) +
         type_vector("O");
}

VectorXd StubEmbedder::path_point(const Vec2& p) const {
  const double v[2] = {p.x() / tau_, p.y() / tau_};
  return field("P.loc", v) + type_vector("P");
}

std::vector<double> StubEmbedder::visual(std::span<const double> histogram,
                                         std::span<const std::string> categories, double mean_depth) const {
  VectorXd v = VectorXd::Zero(dim_);
  double total = 0;
  for (std::size_t k = 0; k < histogram.size() && k < categories.size(); ++k) {
    if (histogram[k] <= 0) continue;
    v += histogram[k] * text(categories[k]);
    total += histogram[k];
  }
  if (total > 0) v /= total;
  const double d[1] = {mean_depth / tau_};
  v += 0.25 * field("vis.depth", d);
  return {v.data(), v.data() + v.size()};
}

// ---------------------------------------------------------------------------

VectorXd SelectionHead::similarity(const VectorXd& e_next, const MatrixXd& candidates) const {
  const VectorXd projected = A * e_next;
  return candidates * (A.transpose() * projected);
}

SelectionHead SelectionHead::identity(int dim) {
  SelectionHead h;
  h.A = MatrixXd::Identity(dim, dim);
  h.type_w = VectorXd::Zero(dim);
  return h;
}

SelectionHead SelectionHead::random(int dim, int dim_out, std::uint64_t seed) {
  Rng rng(seed);
  SelectionHead h;
  h.A.resize(dim_out, dim);
  for (int i = 0; i < dim_out; ++i)
    for (int j = 0; j < dim; ++j) h.A(i, j) = rng.uniform(-1.0, 1.0);
  h.type_w.resize(dim);
  for (int j = 0; j < dim; ++j) h.type_w[j] = rng.uniform(-1.0, 1.0);
  h.type_b = rng.uniform(-1.0, 1.0);
  return h;
}

void SelectionHead::validate() const {
  if (A.rows() == 0 || A.cols() == 0) throw InvalidInput("selection head: empty A");
  if (type_w.size() != A.cols()) throw InvalidInput("selection head: classifier size mismatch");
  if (!A.allFinite() || !type_w.allFinite() || !std::isfinite(type_b))
    throw InvalidInput("selection head: non-finite weights");
}

GoalChoice head_select(const SelectionHead& head, const VectorXd& e_next, const MatrixXd& frontier_embs,
                       std::span<const int> frontier_ids, const MatrixXd& object_embs,
                       std::span<const int> object_ids) {
  if (static_cast<std::size_t>(frontier_embs.rows()) != frontier_ids.size() ||
      static_cast<std::size_t>(object_embs.rows()) != object_ids.size())
    throw InvalidInput("head_select: ids do not match embeddings");
  if (frontier_ids.empty() && object_ids.empty()) throw NoGoal("head_select: no candidates");
  GoalKind kind = head.type_logit(e_next) > 0 ? GoalKind::Object : GoalKind::Frontier;
  if (kind == GoalKind::Object && object_ids.empty()) kind = GoalKind::Frontier;
  if (kind == GoalKind::Frontier && frontier_ids.empty()) kind = GoalKind::Object;
  const bool obj = kind == GoalKind::Object;
  const auto& embs = obj ? object_embs : frontier_embs;
  const auto ids = obj ? object_ids : frontier_ids;
  const VectorXd s = head.similarity(e_next, embs);
  std::size_t best = 0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    const double a = s[static_cast<Eigen::Index>(i)], b = s[static_cast<Eigen::Index>(best)];
    if (a > b || (a == b && ids[i] < ids[best])) best = i;
  }
  return {kind, ids[best]};
}

double head_loss(double type_logit, int type_label, const VectorXd& sel_logits, int sel_label, double lambda) {
  if (type_label != 0 && type_label != 1) throw InvalidInput("head_loss: type label must be 0 or 1");
  if (sel_label < 0 || sel_label >= sel_logits.size()) throw InvalidInput("head_loss: selection label out of range");
  // log(1 + e^x) - x*y, evaluated without overflow.
  const double x = type_logit;
  const double bce = std::max(x, 0.0) - x * type_label + std::log1p(std::exp(-std::abs(x)));
  const double m = sel_logits.maxCoeff();
  const double lse = m + std::log((sel_logits.array() - m).exp().sum());
  const double ce = lse - sel_logits[sel_label];
  return bce + lambda * ce;
}

double batch_loss(const SelectionHead& head, std::span<const HeadSample> batch, double lambda) {
  double total = 0;
  for (const auto& s : batch)
    total += head_loss(head.type_logit(s.e_next), s.type_label, head.similarity(s.e_next, s.candidates),
                       s.sel_label, lambda);
  return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

MatrixXd numeric_grad_A(const SelectionHead& head, std::span<const HeadSample> batch, double lambda, double eps) {
  SelectionHead h = head;
  MatrixXd g(h.A.rows(), h.A.cols());
  for (Eigen::Index i = 0; i < h.A.rows(); ++i)
    for (Eigen::Index j = 0; j < h.A.cols(); ++j) {
      const double a = h.A(i, j);
      h.A(i, j) = a + eps;
      const double up = batch_loss(h, batch, lambda);
      h.A(i, j) = a - eps;
      const double down = batch_loss(h, batch, lambda);
      h.A(i, j) = a;
      g(i, j) = (up - down) / (2 * eps);
    }
  return g;
}

SelectionHead load_head(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open head weights " + path);
  try {
    nlohmann::json j;
    in >> j;
    if (j.value("format", std::string()) != "fomhead/1") throw LoadError(path + ": format tag is not fomhead/1");
    const auto rows = j.at("A").get<std::vector<std::vector<double>>>();
    const auto w = j.at("type_w").get<std::vector<double>>();
    SelectionHead h;
    if (rows.empty()) throw LoadError(path + ": empty A");
    h.A.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.front().size()) throw LoadError(path + ": ragged A");
      for (std::size_t k = 0; k < rows[i].size(); ++k)
        h.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    h.type_w = Eigen::Map<const VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    h.type_b = j.value("type_b", 0.0);
    h.validate();
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw LoadError(path + ": " + e.what());
  }
}

void save_head(const SelectionHead& head, const std::string& path) {
  nlohmann::json j;
  j["format"] = "fomhead/1";
  j["A"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < head.A.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(head.A.cols()));
    for (Eigen::Index k = 0; k < head.A.cols(); ++k) row[static_cast<std::size_t>(k)] = head.A(i, k);
    j["A"].push_back(row);
  }
  j["type_w"] = std::vector<double>(head.type_w.data(), head.type_w.data() + head.type_w.size());
  j["type_b"] = head.type_b;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump() << "\n";
}

HeadPolicy::HeadPolicy(SelectionHead head, StubEmbedder embedder)
    : head_(std::move(head)), embedder_(std::move(embedder)) {
  head_.validate();
  if (head_.dim() != embedder_.dim()) throw InvalidInput("head dimension does not match embedder");
}

GoalChoice HeadPolicy::select(const PolicySnapshot& snap, const OracleContext*) {
  const int d = embedder_.dim();
  MatrixXd fe(static_cast<Eigen::Index>(snap.frontiers.size()), d);
  MatrixXd oe(static_cast<Eigen::Index>(snap.objects.size()), d);
  std::vector<int> fid, oid;
  for (std::size_t i = 0; i < snap.frontiers.size(); ++i) {
    fe.row(static_cast<Eigen::Index>(i)) = embedder_.frontier(snap.frontiers[i]).transpose();
    fid.push_back(snap.frontiers[i].id);
  }
  for (std::size_t i = 0; i < snap.objects.size(); ++i) {
    oe.row(static_cast<Eigen::Index>(i)) = embedder_.object(snap.objects[i]).transpose();
    oid.push_back(snap.objects[i].id);
  }
  return head_select(head_, embedder_.text(snap.target), fe, fid, oe, oid);
}

}  // namespace fomnav::policy
