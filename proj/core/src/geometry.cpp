#include "mlpcv/geometry.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mlpcv {

namespace {

// Degenerate-polygon threshold for construction inputs. Kept far below any
// face area the subdivision itself can produce, so re-rooting a workspace on
// a tiny but genuine face never throws.
constexpr double kFlatPolygonArea = 1e-15;

[[noreturn]] void fail_audit(const char* what) {
  throw std::logic_error(std::string("dcel audit: ") + what);
}

}  // namespace

double polygon_area(std::span<const Vec2> polygon) {
  if (polygon.size() < 3) {
    throw TooFewVertices("polygon_area: need at least 3 vertices");
  }
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2& p = polygon[i];
    const Vec2& q = polygon[(i + 1) % polygon.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * twice;
}

Vec2 polygon_centroid(std::span<const Vec2> polygon) {
  Vec2 c;
  for (const Vec2& p : polygon) {
    c.x += p.x;
    c.y += p.y;
  }
  const double inv = 1.0 / static_cast<double>(polygon.size());
  return {c.x * inv, c.y * inv};
}

Dcel Dcel::unit_square() {
  Dcel d;
  d.reset_unit_square();
  return d;
}

Dcel Dcel::from_convex_polygon(std::span<const Vec2> polygon) {
  Dcel d;
  d.reset(polygon);
  return d;
}

void Dcel::reset_unit_square() {
  const std::array<Vec2, 4> corners{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}};
  reset(corners);
}

void Dcel::reset(std::span<const Vec2> polygon) {
  const std::size_t k = polygon.size();
  if (k < 3) {
    throw TooFewVertices("dcel: polygon needs at least 3 vertices");
  }
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % k];
    const Vec2& c = polygon[(i + 2) % k];
    const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    if (cross < -kGeomEps) {
      throw NonConvexInput("dcel: polygon is not convex counterclockwise");
    }
  }
  const double area = polygon_area(polygon);
  if (area <= kFlatPolygonArea) {
    throw NonConvexInput("dcel: polygon is degenerate (non-positive area)");
  }

  vertices_.assign(polygon.begin(), polygon.end());
  half_edges_.clear();
  faces_.clear();
  lines_.clear();
  domain_area_ = area;

  const Index n = static_cast<Index>(k);
  half_edges_.resize(2 * k);
  // Inner half-edge i runs v_i -> v_{i+1}; its twin n + i runs the other way
  // around the outer face.
  for (Index i = 0; i < n; ++i) {
    half_edges_[i] = {i, (i + 1) % n, n + i, 1};
    half_edges_[n + i] = {(i + 1) % n, n + (i - 1 + n) % n, i, 0};
  }
  faces_.push_back({n, 0, true});   // outer face, id 0
  faces_.push_back({0, 0, false});  // the single inner face
}

void Dcel::check_line_slot(int line_index) const {
  if (line_index != static_cast<int>(lines_.size())) {
    throw std::logic_error("dcel: line_index must equal the current line count");
  }
  if (line_index >= kMaskCapacity) {
    throw MaskOverflow("dcel: arrangement holds at most 64 lines");
  }
}

Index Dcel::split_edge(Index h, const Vec2& point) {
  const Index t = half_edges_[h].twin;
  const Index nv = static_cast<Index>(vertices_.size());
  vertices_.push_back(point);

  const Index h2 = static_cast<Index>(half_edges_.size());
  const Index t2 = h2 + 1;
  half_edges_.push_back({nv, half_edges_[h].next, t, half_edges_[h].face});
  half_edges_.push_back({nv, half_edges_[t].next, h, half_edges_[t].face});
  half_edges_[h].next = h2;
  half_edges_[h].twin = t2;
  half_edges_[t].next = t2;
  half_edges_[t].twin = h2;
  return nv;
}

void Dcel::split_face(Index face_id, std::span<const int> vertex_sign) {
  // Gather the boundary loop once; faces are small (a convex polygon).
  std::vector<Index> loop;
  const Index start = faces_[face_id].boundary;
  for (Index e = start;;) {
    loop.push_back(e);
    e = half_edges_[e].next;
    if (e == start) break;
  }

  const int k = static_cast<int>(loop.size());
  bool has_pos = false;
  bool has_neg = false;
  for (Index e : loop) {
    const int s = vertex_sign[half_edges_[e].origin];
    has_pos |= s > 0;
    has_neg |= s < 0;
  }
  if (!has_pos || !has_neg) {
    return;  // face lies on one side (possibly touching the line)
  }

  // All strictly crossed edges were already split, so along the boundary the
  // positive and negative arcs are separated by on-line vertices. The chord
  // runs between the zero vertex entering the negative arc and the zero
  // vertex entering the positive arc.
  int into_neg = -1;
  int into_pos = -1;
  for (int i = 0; i < k; ++i) {
    const int s = vertex_sign[half_edges_[loop[i]].origin];
    const int sn = vertex_sign[half_edges_[loop[(i + 1) % k]].origin];
    if (s == 0 && sn < 0) into_neg = i;
    if (s == 0 && sn > 0) into_pos = i;
  }
  if (into_neg < 0 || into_pos < 0) {
    throw std::logic_error("dcel: crossed face has no chord endpoints");
  }

  const Index a = loop[into_neg];  // origin = chord start u
  const Index b = loop[into_pos];  // origin = chord end w
  const Index prev_a = loop[(into_neg - 1 + k) % k];
  const Index prev_b = loop[(into_pos - 1 + k) % k];

  const Index d1 = static_cast<Index>(half_edges_.size());
  const Index d2 = d1 + 1;
  const Index nf = static_cast<Index>(faces_.size());
  half_edges_.push_back({half_edges_[a].origin, b, d2, face_id});
  half_edges_.push_back({half_edges_[b].origin, a, d1, nf});
  half_edges_[prev_a].next = d1;
  half_edges_[prev_b].next = d2;

  faces_[face_id].boundary = d1;
  faces_.push_back({d2, faces_[face_id].line_mask, false});
  for (Index e = d2;; e = half_edges_[e].next) {
    half_edges_[e].face = nf;
    if (half_edges_[e].next == d2) break;
  }
}

void Dcel::add_line(int line_index, const AffineFn2& line) {
  if (line.is_degenerate_line()) {
    throw DegenerateLine("dcel: line has a = b = 0 within tolerance");
  }
  check_line_slot(line_index);

  // Snap tolerance: |a*x + b*y + c| <= eps * |(a, b)| means the vertex is
  // within eps of the line, so it is treated as lying on it.
  const double tol = kGeomEps * std::hypot(line.a, line.b);
  std::vector<int> sign(vertices_.size());
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    const double s = line.evaluate(vertices_[v]);
    sign[v] = (s > tol) ? 1 : (s < -tol ? -1 : 0);
  }

  // Split every strictly crossed edge. Sub-edges gain an on-line endpoint and
  // can never cross again, so the snapshot bound is enough.
  const Index edge_snapshot = static_cast<Index>(half_edges_.size());
  for (Index h = 0; h < edge_snapshot; ++h) {
    if (half_edges_[h].twin < h) continue;  // visit each edge once
    const Index o = half_edges_[h].origin;
    const Index d = half_edges_[half_edges_[h].twin].origin;
    if (sign[o] * sign[d] >= 0) continue;
    const Vec2 po = vertices_[o];
    const Vec2 pd = vertices_[d];
    const double vo = line.evaluate(po);
    const double vd = line.evaluate(pd);
    const double t = vo / (vo - vd);
    split_edge(h, {po.x + t * (pd.x - po.x), po.y + t * (pd.y - po.y)});
    sign.push_back(0);
  }

  // Split every straddling face. Children are one-sided, so only the
  // pre-existing ids need a look.
  const Index face_snapshot = static_cast<Index>(faces_.size());
  for (Index f = 0; f < face_snapshot; ++f) {
    if (faces_[f].is_outer) continue;
    split_face(f, sign);
  }

  // Mask update runs even when the line missed the subdivision.
  lines_.push_back(line);
  const std::uint64_t bit = std::uint64_t{1} << line_index;
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (faces_[f].is_outer) continue;
    if (line.evaluate(face_centroid(static_cast<Index>(f))) > 0.0) {
      faces_[f].line_mask |= bit;
    }
  }
}

void Dcel::add_constant_line(int line_index, const AffineFn2& line) {
  check_line_slot(line_index);
  lines_.push_back(line);
  if (line.c > 0.0) {
    const std::uint64_t bit = std::uint64_t{1} << line_index;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (!faces_[f].is_outer) faces_[f].line_mask |= bit;
    }
  }
}

void Dcel::face_polygon(Index face_id, std::vector<Vec2>& out) const {
  if (face_id < 0 || face_id >= static_cast<Index>(faces_.size())) {
    throw std::logic_error("dcel: face id out of range");
  }
  if (faces_[face_id].is_outer) {
    throw OuterFaceQuery("dcel: outer face has no polygon");
  }
  out.clear();
  const Index start = faces_[face_id].boundary;
  for (Index e = start;;) {
    out.push_back(vertices_[half_edges_[e].origin]);
    e = half_edges_[e].next;
    if (e == start) break;
  }
}

std::vector<Vec2> Dcel::face_polygon(Index face_id) const {
  std::vector<Vec2> out;
  face_polygon(face_id, out);
  return out;
}

Vec2 Dcel::face_centroid(Index face_id) const {
  const Index start = faces_[face_id].boundary;
  Vec2 c;
  int n = 0;
  for (Index e = start;;) {
    const Vec2& p = vertices_[half_edges_[e].origin];
    c.x += p.x;
    c.y += p.y;
    ++n;
    e = half_edges_[e].next;
    if (e == start) break;
  }
  return {c.x / n, c.y / n};
}

void Dcel::audit() const {
  const Index he_count = static_cast<Index>(half_edges_.size());
  const Index face_count = static_cast<Index>(faces_.size());
  const Index vert_count = static_cast<Index>(vertices_.size());
  if (face_count < 2) fail_audit("fewer than two faces");
  if (he_count % 2 != 0) fail_audit("odd number of half-edges");

  for (const Vec2& v : vertices_) {
    if (v.x < -kGeomEps || v.x > 1.0 + kGeomEps || v.y < -kGeomEps || v.y > 1.0 + kGeomEps) {
      fail_audit("vertex outside the unit square");
    }
  }

  for (Index h = 0; h < he_count; ++h) {
    const HalfEdge& e = half_edges_[h];
    if (e.origin < 0 || e.origin >= vert_count) fail_audit("origin out of range");
    if (e.next < 0 || e.next >= he_count) fail_audit("next out of range");
    if (e.twin < 0 || e.twin >= he_count) fail_audit("twin out of range");
    if (e.face < 0 || e.face >= face_count) fail_audit("face out of range");
    if (e.twin == h) fail_audit("half-edge is its own twin");
    if (half_edges_[e.twin].twin != h) fail_audit("twin involution broken");
    if (half_edges_[e.twin].origin != half_edges_[e.next].origin) {
      fail_audit("destination differs from twin origin");
    }
    if (half_edges_[e.next].face != e.face) fail_audit("next crosses a face boundary");
  }

  int outer_faces = 0;
  std::vector<char> seen(half_edges_.size(), 0);
  double area_sum = 0.0;
  std::vector<Vec2> poly;
  for (Index f = 0; f < face_count; ++f) {
    const Face& face = faces_[f];
    if (face.is_outer) {
      ++outer_faces;
      if (f != 0) fail_audit("outer face is not id 0");
    }
    if (face.boundary < 0 || face.boundary >= he_count) fail_audit("face boundary out of range");

    poly.clear();
    Index e = face.boundary;
    for (Index steps = 0;; ++steps) {
      if (steps > he_count) fail_audit("boundary loop does not close");
      if (half_edges_[e].face != f) fail_audit("boundary loop leaves its face");
      if (seen[e]) fail_audit("half-edge on two boundary loops");
      seen[e] = 1;
      poly.push_back(vertices_[half_edges_[e].origin]);
      e = half_edges_[e].next;
      if (e == face.boundary) break;
    }
    if (poly.size() < 3) fail_audit("face boundary shorter than 3 edges");

    if (!face.is_outer) {
      const double area = polygon_area(poly);
      if (area <= 0.0) fail_audit("inner face is not counterclockwise");
      area_sum += area;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        const Vec2& c = poly[(i + 2) % poly.size()];
        const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if (cross < -kGeomEps) fail_audit("inner face is not convex");
      }
      if (lines_.size() < 64 && (face.line_mask >> lines_.size()) != 0) {
        fail_audit("mask has bits beyond the inserted lines");
      }
    } else if (face.line_mask != 0) {
      fail_audit("outer face has mask bits");
    }
  }
  if (outer_faces != 1) fail_audit("not exactly one outer face");
  for (char s : seen) {
    if (!s) fail_audit("half-edge on no boundary loop");
  }

  // V - E + F = 2, counting the outer face.
  if (vert_count - he_count / 2 + face_count != 2) fail_audit("Euler characteristic broken");

  if (std::abs(area_sum - domain_area_) > 1e-9) fail_audit("inner face areas do not sum to the domain area");

  // Mask bits must agree with the sign of each line at the face centroid
  // (faces are line-free, so the centroid speaks for the whole interior).
  for (Index f = 1; f < face_count; ++f) {
    const Vec2 c = face_centroid(f);
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      const bool bit = (faces_[f].line_mask >> i) & 1;
      const bool positive = lines_[i].is_degenerate_line() ? lines_[i].c > 0.0
                                                           : lines_[i].evaluate(c) > 0.0;
      if (bit != positive) fail_audit("mask bit disagrees with centroid sign");
    }
  }
}

}  // namespace mlpcv
