#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlpcv/geometry.hpp"

namespace mlpcv {

// Writes a set of polygons (unit-square coordinates) as an SVG image, each
// polygon filled with a color hashed from its index and outlined. Output is
// deterministic byte for byte.
void write_polygon_svg(const std::string& path, std::span<const std::vector<Vec2>> polygons,
                       bool fill_faces = true);

// Subdivision snapshot of a single arrangement.
void dump_svg(const Dcel& dcel, const std::string& path, bool fill_faces = true);

}  // namespace mlpcv
