#pragma once

// Run configuration: every numeric default in one JSON document.
//
//   {"mapping": {...}, "objects": {...}, "planning": {...}, "navigator": {...},
//    "noise": {...}, "world": {...}, "agent": {...}}
//
// Keys mirror the struct field names. Unknown sections or keys are errors.

#include <string>

#include <json.hpp>

#include "fomnav/navigator.hpp"
#include "fomnav/simulator.hpp"

namespace fomnav::config {

inline constexpr const char* kConfigEnv = "FOMNAV_CONFIG";

struct RunConfig {
  nav::NavigatorConfig nav;
  sim::GenParams world;  // world.agent is the agent used in generated worlds
};

/// Throws InvalidInput naming the offending key.
void apply(const nlohmann::json& doc, RunConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);

/// Parses the file and applies it over the defaults. Throws LoadError.
RunConfig load(const std::string& path);

}  // namespace fomnav::config
