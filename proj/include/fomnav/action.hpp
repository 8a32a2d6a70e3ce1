#pragma once

#include <optional>
#include <string>

namespace fomnav {

/// Discrete agent actions: 0.25 m forward, 30 degree turns, stop.
enum class Action { Forward, TurnLeft, TurnRight, Stop };

inline const char* to_string(Action a) {
  switch (a) {
    case Action::Forward: return "forward";
    case Action::TurnLeft: return "turn_left";
    case Action::TurnRight: return "turn_right";
    case Action::Stop: return "stop";
  }
  return "?";
}

inline std::optional<Action> action_from_string(const std::string& s) {
  for (Action a : {Action::Forward, Action::TurnLeft, Action::TurnRight, Action::Stop})
    if (s == to_string(a)) return a;
  return std::nullopt;
}

}  // namespace fomnav
