#include "fomnav/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fomnav::image {

void Rgb::set(int x, int y, std::uint32_t rgb) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  auto* p = &data[(static_cast<std::size_t>(y) * width + x) * 3];
  p[0] = static_cast<std::uint8_t>(rgb >> 16);
  p[1] = static_cast<std::uint8_t>(rgb >> 8);
  p[2] = static_cast<std::uint8_t>(rgb);
}

Gray map_codes(const OccupancyGrid& grid) {
  Gray img{grid.cols(), grid.rows(), {}};
  img.data.resize(grid.shape().size());
  for (int r = 0; r < grid.rows(); ++r)
    for (int c = 0; c < grid.cols(); ++c) {
      std::uint8_t v = kUnknownCode;
      switch (grid.state({r, c})) {
        case CellState::Obstacle: v = kObstacleCode; break;
        case CellState::FreeExplored: v = kFreeCode; break;
        case CellState::Unknown: v = kUnknownCode; break;
      }
      img.data[static_cast<std::size_t>(grid.rows() - 1 - r) * img.width + c] = v;
    }
  return img;
}

Gray field_image(const DistanceField& field) {
  const auto& s = field.shape;
  Gray img{s.cols, s.rows, std::vector<std::uint8_t>(s.size(), 0)};
  double vmax = 0;
  for (double v : field.values)
    if (std::isfinite(v)) vmax = std::max(vmax, v);
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < s.cols; ++c) {
      const double v = field.values[s.index({r, c})];
      if (!std::isfinite(v)) continue;
      const double t = vmax > 0 ? v / vmax : 0.0;
      img.data[static_cast<std::size_t>(s.rows - 1 - r) * s.cols + c] =
          static_cast<std::uint8_t>(1 + std::lround(254 * t));
    }
  return img;
}

void write_pgm(const Gray& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!os) throw Error("cannot write " + path);
}

Gray read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open " + path);
  std::string magic;
  int maxval = 0;
  Gray img;
  is >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || maxval != 255 || img.width <= 0 || img.height <= 0)
    throw LoadError(path + ": not an 8-bit binary PGM");
  is.get();
  img.data.resize(static_cast<std::size_t>(img.width) * img.height);
  is.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!is) throw LoadError(path + ": truncated PGM");
  return img;
}

namespace {

void put_be32(std::string& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

void chunk(std::string& out, const char* type, const std::string& body) {
  put_be32(out, static_cast<std::uint32_t>(body.size()));
  std::string tagged = std::string(type, 4) + body;
  out += tagged;
  put_be32(out, static_cast<std::uint32_t>(
                    ::crc32(0, reinterpret_cast<const Bytef*>(tagged.data()), static_cast<uInt>(tagged.size()))));
}

}  // namespace

std::string encode_png(const Rgb& img) {
  std::string raw;
  raw.reserve(static_cast<std::size_t>(img.height) * (1 + 3 * img.width));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    raw.append(reinterpret_cast<const char*>(&img.data[static_cast<std::size_t>(y) * img.width * 3]),
               static_cast<std::size_t>(img.width) * 3);
  }
  uLongf zlen = ::compressBound(static_cast<uLong>(raw.size()));
  std::string z(zlen, '\0');
  if (::compress2(reinterpret_cast<Bytef*>(z.data()), &zlen, reinterpret_cast<const Bytef*>(raw.data()),
                  static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw Error("PNG compression failed");
  z.resize(zlen);

  std::string out = "\x89PNG\r\n\x1a\n";
  std::string ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit RGB
  chunk(out, "IHDR", ihdr);
  chunk(out, "IDAT", z);
  chunk(out, "IEND", "");
  return out;
}

void write_png(const Rgb& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  os << encode_png(img);
  if (!os) throw Error("cannot write " + path);
}

Rgb render_map(const mapping::FrontierObjectMap& map, const RenderState& st, int scale) {
  const auto& grid = map.grid;
  const auto& shape = grid.shape();
  CellBox box = grid.known_box();
  box.expand(shape.cell_of(st.agent));
  box = shape.clip(box.dilated(10));
  if (box.empty()) box = shape.full();
  const int w = (box.c1 - box.c0 + 1) * scale, h = (box.r1 - box.r0 + 1) * scale;
  Rgb img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3, 255)};

  auto fill = [&](const Cell& c, std::uint32_t rgb) {
    if (!box.contains(c)) return;
    const int x0 = (c.col - box.c0) * scale, y0 = (box.r1 - c.row) * scale;
    for (int dy = 0; dy < scale; ++dy)
      for (int dx = 0; dx < scale; ++dx) img.set(x0 + dx, y0 + dy, rgb);
  };
  auto dot = [&](const geometry::Vec2& p, int radius, std::uint32_t rgb) {
    const Cell c = shape.cell_of(p);
    for (int dr = -radius; dr <= radius; ++dr)
      for (int dc = -radius; dc <= radius; ++dc)
        if (dr * dr + dc * dc <= radius * radius) fill({c.row + dr, c.col + dc}, rgb);
  };

  for (int r = box.r0; r <= box.r1; ++r)
    for (int c = box.c0; c <= box.c1; ++c) {
      const Cell cell{r, c};
      if (grid.is_obstacle(cell)) fill(cell, 0x404040);
      else if (grid.is_inflated(cell) || map.collision.blocked(cell)) fill(cell, 0xa0a0a0);
      else if (grid.is_explored(cell)) fill(cell, 0xb8e6b0);
      else fill(cell, 0xf4f4f4);
    }
  for (const auto& f : map.frontiers)
    for (const auto& c : f.cells) fill(c, 0xe02020);
  for (const auto& o : map.objects.objects) dot(o.center.head<2>(), 2, 0x8030c0);
  for (const auto& c : st.plan) fill(c, 0xff80c0);
  for (std::size_t i = 1; i < map.path_history.size(); ++i) {
    const auto a = map.path_history[i - 1], b = map.path_history[i];
    const int n = std::max(1, static_cast<int>((b - a).norm() / (0.5 * shape.resolution)));
    for (int k = 0; k <= n; ++k) fill(shape.cell_of(a + (b - a) * (double(k) / n)), 0x101070);
  }
  if (st.goal) {
    if (st.goal->kind == GoalKind::Frontier) {
      if (const auto* f = map.find_frontier(st.goal->id)) dot(f->center, 3, 0x20c0e0);
    } else if (const auto* o = map.objects.find(st.goal->id)) {
      dot(o->center.head<2>(), 3, 0xff9020);
    }
  }
  dot(st.agent, 2, 0x000000);
  return img;
}

}  // namespace fomnav::image
