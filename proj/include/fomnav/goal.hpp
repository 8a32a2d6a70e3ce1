#pragma once

#include <string>

namespace fomnav {

enum class GoalKind { Frontier, Object };

/// High-level navigation goal: a live frontier or object id.
struct GoalChoice {
  GoalKind kind = GoalKind::Frontier;
  int id = -1;
  bool operator==(const GoalChoice&) const = default;
};

inline const char* to_string(GoalKind k) { return k == GoalKind::Frontier ? "frontier" : "object"; }

}  // namespace fomnav
