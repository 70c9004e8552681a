#include "mlpcv/svg.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "mlpcv/format.hpp"

namespace mlpcv {

namespace {

constexpr double kCanvas = 1000.0;
constexpr double kMargin = 10.0;

// Unit square to SVG canvas, y flipped.
void append_point(std::string& out, const Vec2& p) {
  append_double(out, kMargin + p.x * kCanvas);
  out += ',';
  append_double(out, kMargin + (1.0 - p.y) * kCanvas);
}

std::string face_color(std::size_t id) {
  std::uint64_t h = id * 0x9e3779b97f4a7c15ull + 0x6a09e667f3bcc909ull;
  h ^= h >> 29;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 32;
  const int hue = static_cast<int>(h % 360);
  const int light = 70 + static_cast<int>((h >> 9) % 20);
  return "hsl(" + std::to_string(hue) + ",55%," + std::to_string(light) + "%)";
}

}  // namespace

void write_polygon_svg(const std::string& path, std::span<const std::vector<Vec2>> polygons,
                       bool fill_faces) {
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1020\" height=\"1020\" "
         "viewBox=\"0 0 1020 1020\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"1020\" height=\"1020\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < polygons.size(); ++i) {
    out += "<polygon points=\"";
    for (std::size_t v = 0; v < polygons[i].size(); ++v) {
      if (v) out += ' ';
      append_point(out, polygons[i][v]);
    }
    out += "\" fill=\"";
    out += fill_faces ? face_color(i) : std::string("none");
    out += "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }
  out += "</svg>\n";

  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw Error("svg: cannot open " + path + " for writing");
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

void dump_svg(const Dcel& dcel, const std::string& path, bool fill_faces) {
  std::vector<std::vector<Vec2>> polygons;
  polygons.reserve(dcel.inner_face_count());
  for (std::size_t i = 0; i < dcel.inner_face_count(); ++i) {
    polygons.push_back(dcel.face_polygon(dcel.inner_face_id(i)));
  }
  write_polygon_svg(path, polygons, fill_faces);
}

}  // namespace mlpcv
