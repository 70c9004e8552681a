#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mlpcv/errors.hpp"

namespace mlpcv {

// Module-wide geometric tolerance, in unit-square coordinates. Intersections
// within kGeomEps of an existing vertex snap to it; a line passing within
// kGeomEps of every vertex of an edge is treated as collinear with it.
inline constexpr double kGeomEps = 1e-9;

// One fixed-width mask word; arrangements hold at most this many lines.
inline constexpr int kMaskCapacity = 64;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// The affine function a*x + b*y + c. Its zero set is a line unless a and b
// both vanish, in which case the function is constant over the plane.
struct AffineFn2 {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double evaluate(double x, double y) const { return a * x + b * y + c; }
  double evaluate(const Vec2& p) const { return a * p.x + b * p.y + c; }

  bool is_degenerate_line(double eps = kGeomEps) const {
    return a <= eps && a >= -eps && b <= eps && b >= -eps;
  }
};

inline AffineFn2 operator+(const AffineFn2& f, const AffineFn2& g) {
  return {f.a + g.a, f.b + g.b, f.c + g.c};
}

inline AffineFn2 operator*(double s, const AffineFn2& f) {
  return {s * f.a, s * f.b, s * f.c};
}

using Index = std::int32_t;
inline constexpr Index kInvalidIndex = -1;

struct HalfEdge {
  Index origin = kInvalidIndex;
  Index next = kInvalidIndex;
  Index twin = kInvalidIndex;
  Index face = kInvalidIndex;
};

struct Face {
  Index boundary = kInvalidIndex;  // one representative half-edge
  std::uint64_t line_mask = 0;     // bit i set <=> interior on positive side of line i
  bool is_outer = false;
};

// Signed shoelace area; positive for counterclockwise input.
// Throws TooFewVertices for fewer than 3 vertices.
double polygon_area(std::span<const Vec2> polygon);

// Mean of the vertices. Interior point for convex polygons.
Vec2 polygon_centroid(std::span<const Vec2> polygon);

// Bounded planar subdivision of a convex region (normally the unit square)
// stored as a doubly-connected edge list. Lines are inserted incrementally;
// every inner face keeps a bitmask recording, per inserted line, whether the
// face interior lies on the line's positive side.
//
// Face ids are append-only: splitting face F shrinks F in place and appends
// exactly one new face, so iteration indices taken before an insertion stay
// valid afterwards. Face id 0 is always the single outer face.
//
// Single-writer structure: mutation is single-threaded, distinct instances
// are independent.
class Dcel {
 public:
  Dcel() = default;

  static Dcel unit_square();
  // Builds a subdivision whose single inner face is the given convex CCW
  // polygon. Throws TooFewVertices / NonConvexInput.
  static Dcel from_convex_polygon(std::span<const Vec2> polygon);

  // Re-initialize in place (keeps vector capacity across reuses).
  void reset(std::span<const Vec2> polygon);
  void reset_unit_square();

  // Inserts the zero set of `line`, clipped to the current subdivision:
  // crossed edges are split with new vertices, crossed faces are split in
  // two. Mask bit `line_index` is then set on every inner face whose
  // centroid evaluates positive, whether or not any topology changed.
  // line_index must equal lines().size(). Throws DegenerateLine and
  // MaskOverflow.
  void add_line(int line_index, const AffineFn2& line);

  // Records a degenerate-as-line function (a = b = 0) without touching the
  // topology; mask bit line_index is set on all inner faces iff c > 0.
  void add_constant_line(int line_index, const AffineFn2& line);

  // CCW vertex loop of an inner face. Throws OuterFaceQuery for the outer face.
  std::vector<Vec2> face_polygon(Index face_id) const;
  void face_polygon(Index face_id, std::vector<Vec2>& out) const;
  Vec2 face_centroid(Index face_id) const;

  std::span<const Vec2> vertices() const { return vertices_; }
  std::span<const HalfEdge> half_edges() const { return half_edges_; }
  std::span<const Face> faces() const { return faces_; }
  std::span<const AffineFn2> lines() const { return lines_; }

  std::size_t edge_count() const { return half_edges_.size() / 2; }
  std::size_t inner_face_count() const { return faces_.empty() ? 0 : faces_.size() - 1; }
  Index inner_face_id(std::size_t i) const { return static_cast<Index>(i) + 1; }
  Index outer_face_id() const { return 0; }

  // Area of the region covered by the subdivision (1 for the unit square).
  double domain_area() const { return domain_area_; }

  // Full-structure audit: twin involution, next-cycle closure, face
  // consistency, Euler characteristic, convex CCW inner faces, area
  // conservation, and mask/centroid agreement. Throws std::logic_error
  // with a description of the first violated invariant.
  void audit() const;

 private:
  Index split_edge(Index h, const Vec2& point);
  void split_face(Index face_id, std::span<const int> vertex_sign);
  void check_line_slot(int line_index) const;

  std::vector<Vec2> vertices_;
  std::vector<HalfEdge> half_edges_;
  std::vector<Face> faces_;
  std::vector<AffineFn2> lines_;
  double domain_area_ = 0.0;
};

}  // namespace mlpcv
