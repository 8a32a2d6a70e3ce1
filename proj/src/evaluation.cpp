#include "fomnav/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "fomnav/planning.hpp"

namespace fomnav::evaluation {

using nlohmann::json;

namespace {

constexpr FailureReason kAllReasons[] = {FailureReason::None, FailureReason::Timeout, FailureReason::WrongStop,
                                         FailureReason::DeadEnd, FailureReason::ProtocolError};

}  // namespace

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::Timeout: return "timeout";
    case FailureReason::WrongStop: return "wrong_stop";
    case FailureReason::DeadEnd: return "dead_end";
    case FailureReason::ProtocolError: return "protocol_error";
  }
  return "none";
}

FailureReason failure_from_string(const std::string& s) {
  for (auto r : kAllReasons)
    if (s == to_string(r)) return r;
  throw InvalidInput("unknown failure reason '" + s + "'");
}

double Trajectory::length() const {
  double d = 0;
  for (std::size_t i = 1; i < positions.size(); ++i) d += (positions[i] - positions[i - 1]).norm();
  return d;
}

bool success_position(const sim::WorldSpec& world, const std::string& target, const Vec2& position) {
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    const auto& o = world.objects[i];
    if (o.category != target) continue;
    if (sim::footprint_distance(o.box, position) <= kSuccessDistance && sim::object_visible(world, i, position))
      return true;
  }
  return false;
}

double geodesic_distance(const sim::NavMap& nav, std::span<const Vec2> stops, const Vec2& start) {
  std::vector<Cell> sources;
  for (const auto& p : stops) {
    const Cell c = nav.shape.cell_of(p);
    if (nav.free(c)) sources.push_back(c);
  }
  const Cell s = nav.shape.cell_of(start);
  if (sources.empty() || !nav.free(s)) return kInf;
  planning::FmmOptions opt;
  opt.snap_cells = 0;
  return planning::fmm_field(nav.shape, nav.blocked, sources, opt).at(s);
}

EpisodeResult judge(const sim::WorldSpec& world, const Trajectory& t, const std::string& target, double d_G) {
  EpisodeResult r;
  r.category = target;
  r.d_G = d_G;
  r.d_T = t.length();
  r.steps = t.steps;
  if (t.abort_reason == "dead_end") {
    r.failure = FailureReason::DeadEnd;
  } else if (t.abort_reason == "protocol_error") {
    r.failure = FailureReason::ProtocolError;
  } else if (!t.abort_reason.empty()) {
    throw InvalidInput("unknown abort reason '" + t.abort_reason + "'");
  } else if (!t.stopped || t.steps > kStepLimit) {
    r.failure = FailureReason::Timeout;
  } else if (t.positions.empty() || !success_position(world, target, t.positions.back())) {
    r.failure = FailureReason::WrongStop;
  } else {
    r.success = true;
  }
  return r;
}

double spl(const EpisodeResult& r) {
  if (!(r.d_G > 0) || !std::isfinite(r.d_G)) throw InvalidInput("SPL needs a positive finite d_G");
  if (!r.success) return 0.0;
  return r.d_G / std::max(r.d_G, r.d_T);
}

Report aggregate(std::span<const EpisodeResult> results) {
  if (results.empty()) throw InvalidInput("cannot aggregate zero episodes");
  std::vector<const EpisodeResult*> sorted;
  for (const auto& r : results) sorted.push_back(&r);
  auto key = [](const EpisodeResult* r) {
    return std::tie(r->category, r->episode_id, r->success, r->d_G, r->d_T, r->steps, r->failure);
  };
  std::sort(sorted.begin(), sorted.end(), [&](auto* a, auto* b) { return key(a) < key(b); });

  Report rep;
  for (auto reason : kAllReasons) rep.failures[to_string(reason)] = 0;
  double spl_sum = 0;
  std::map<std::string, double> cat_spl;
  for (const auto* r : sorted) {
    const double s = spl(*r);
    ++rep.episodes;
    rep.successes += r->success ? 1 : 0;
    spl_sum += s;
    ++rep.failures[to_string(r->failure)];
    auto& c = rep.per_category[r->category];
    ++c.episodes;
    c.successes += r->success ? 1 : 0;
    cat_spl[r->category] += s;
  }
  rep.sr = 100.0 * rep.successes / rep.episodes;
  rep.spl = spl_sum / rep.episodes;
  for (auto& [name, c] : rep.per_category) {
    c.sr = 100.0 * c.successes / c.episodes;
    c.spl = cat_spl[name] / c.episodes;
  }
  return rep;
}

std::string format_report(const Report& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %8s %8s %8s\n", "category", "episodes", "SR(%)", "SPL");
  os << line;
  for (const auto& [name, c] : r.per_category) {
    std::snprintf(line, sizeof line, "%-14s %8d %8.1f %8.3f\n", name.c_str(), c.episodes, c.sr, c.spl);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-14s %8d %8.1f %8.3f\n", "all", r.episodes, r.sr, r.spl);
  os << line << "failures:";
  for (const auto& [reason, n] : r.failures) os << ' ' << reason << '=' << n;
  os << '\n';
  return os.str();
}

json report_to_json(const Report& r) {
  json j{{"episodes", r.episodes}, {"successes", r.successes}, {"sr", r.sr}, {"spl", r.spl}};
  j["failures"] = r.failures;
  j["per_category"] = json::object();
  for (const auto& [name, c] : r.per_category)
    j["per_category"][name] = {{"episodes", c.episodes}, {"successes", c.successes}, {"sr", c.sr}, {"spl", c.spl}};
  return j;
}

json result_to_json(const EpisodeResult& r) {
  return {{"episode_id", r.episode_id}, {"category", r.category}, {"success", r.success},
          {"d_G", r.d_G},               {"d_T", r.d_T},           {"steps", r.steps},
          {"failure", to_string(r.failure)}};
}

EpisodeResult result_from_json(const json& j) {
  EpisodeResult r;
  r.episode_id = j.at("episode_id").get<std::string>();
  r.category = j.at("category").get<std::string>();
  r.success = j.at("success").get<bool>();
  r.d_G = j.at("d_G").get<double>();
  r.d_T = j.at("d_T").get<double>();
  r.steps = j.at("steps").get<int>();
  r.failure = failure_from_string(j.at("failure").get<std::string>());
  return r;
}

}  // namespace fomnav::evaluation
