#pragma once

// Episode success judgment, SPL and aggregate reports.

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fomnav/simulator.hpp"

namespace fomnav::evaluation {

using geometry::Vec2;

inline constexpr double kSuccessDistance = 1.0;
inline constexpr int kStepLimit = 500;

enum class FailureReason { None, Timeout, WrongStop, DeadEnd, ProtocolError };

const char* to_string(FailureReason r);
FailureReason failure_from_string(const std::string& s);

struct EpisodeResult {
  std::string episode_id;
  std::string category;
  bool success = false;
  double d_G = 0;  // geodesic start-to-nearest-stop distance
  double d_T = 0;  // executed path length
  int steps = 0;
  FailureReason failure = FailureReason::None;

  bool operator==(const EpisodeResult&) const = default;
};

struct Trajectory {
  std::vector<Vec2> positions;  // start first
  int steps = 0;
  bool stopped = false;
  std::string abort_reason;  // "", "dead_end" or "protocol_error"

  double length() const;
};

/// A target-category instance is within kSuccessDistance of `position` in
/// the plane and visible from it over a full heading sweep.
bool success_position(const sim::WorldSpec& world, const std::string& target, const Vec2& position);

/// FMM distance on the ground-truth navigability map from the nearest of
/// `stops` to `start`; +inf when unreachable.
double geodesic_distance(const sim::NavMap& nav, std::span<const Vec2> stops, const Vec2& start);

EpisodeResult judge(const sim::WorldSpec& world, const Trajectory& trajectory, const std::string& target,
                    double d_G);

/// Success * d_G / max(d_G, d_T). Throws InvalidInput unless d_G > 0.
double spl(const EpisodeResult& r);

struct CategoryStats {
  int episodes = 0;
  int successes = 0;
  double sr = 0;   // percent
  double spl = 0;  // mean
};

struct Report {
  int episodes = 0;
  int successes = 0;
  double sr = 0;   // percent
  double spl = 0;  // mean over all episodes
  std::map<std::string, int> failures;  // every reason, including "none"
  std::map<std::string, CategoryStats> per_category;
};

/// Independent of input order. Throws InvalidInput on an empty input.
Report aggregate(std::span<const EpisodeResult> results);

std::string format_report(const Report& r);
nlohmann::json report_to_json(const Report& r);

nlohmann::json result_to_json(const EpisodeResult& r);
EpisodeResult result_from_json(const nlohmann::json& j);

}  // namespace fomnav::evaluation
