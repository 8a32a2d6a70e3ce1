#pragma once

// Map exports: binary PGM with fixed value codes and color PNG renders.
// Images are north-up: image row 0 is the grid's last row.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fomnav/goal.hpp"
#include "fomnav/mapping.hpp"

namespace fomnav::image {

inline constexpr std::uint8_t kObstacleCode = 0;
inline constexpr std::uint8_t kUnknownCode = 128;
inline constexpr std::uint8_t kFreeCode = 255;

struct Gray {
  int width = 0, height = 0;
  std::vector<std::uint8_t> data;
};

struct Rgb {
  int width = 0, height = 0;
  std::vector<std::uint8_t> data;  // 3 bytes per pixel

  void set(int x, int y, std::uint32_t rgb);
};

/// 0 obstacle, 128 unknown, 255 free-explored.
Gray map_codes(const OccupancyGrid& grid);
/// Finite values scaled to 1..255 by the largest finite value; +inf is 0.
Gray field_image(const DistanceField& field);

void write_pgm(const Gray& img, const std::string& path);
Gray read_pgm(const std::string& path);

std::string encode_png(const Rgb& img);
void write_png(const Rgb& img, const std::string& path);

struct RenderState {
  geometry::Vec2 agent = geometry::Vec2::Zero();
  std::vector<Cell> plan;
  std::optional<GoalChoice> goal;
};

/// Grey inflated obstacles, green explored floor, purple objects, red
/// frontiers, orange / cyan selected object / frontier, pink planned path,
/// navy executed path.
Rgb render_map(const mapping::FrontierObjectMap& map, const RenderState& state, int scale = 2);

}  // namespace fomnav::image
