#include "mlpcv/integrate.hpp"

#include <fstream>
#include <utility>

#include "mlpcv/format.hpp"
#include "mlpcv/svg.hpp"

namespace mlpcv {

namespace {

void add_scaled(AffineFn2& acc, double s, const AffineFn2& line) {
  acc.a += s * line.a;
  acc.b += s * line.b;
  acc.c += s * line.c;
}

AffineFn2 combine_row(std::span<const AffineFn2> prev, std::uint64_t mask, const double* weights,
                      double bias, double negative_slope) {
  AffineFn2 line{0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < prev.size(); ++j) {
    if (mask & (std::uint64_t{1} << j)) {
      add_scaled(line, weights[j], prev[j]);
    } else if (negative_slope != 0.0) {
      add_scaled(line, negative_slope * weights[j], prev[j]);
    }
  }
  line.c += bias;
  return line;
}

void insert_lines(Dcel& dcel, std::span<const AffineFn2> lines) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].is_degenerate_line()) {
      dcel.add_constant_line(static_cast<int>(i), lines[i]);
    } else {
      dcel.add_line(static_cast<int>(i), lines[i]);
    }
  }
}

}  // namespace

std::vector<AffineFn2> combine_lines(std::span<const AffineFn2> prev_lines, std::uint64_t mask,
                                     const Layer& layer, double negative_slope) {
  if (layer.in_dim != static_cast<int>(prev_lines.size())) {
    throw DimensionMismatch("combine_lines: layer fan-in differs from line count");
  }
  std::vector<AffineFn2> out(layer.out_dim);
  for (int i = 0; i < layer.out_dim; ++i) {
    const double* w = layer.weights.data() + static_cast<std::size_t>(i) * layer.in_dim;
    out[i] = combine_row(prev_lines, mask, w, layer.biases[i], negative_slope);
  }
  return out;
}

std::vector<AffineFn2> output_affine(std::span<const AffineFn2> last_lines, std::uint64_t mask,
                                     const Layer& out_layer, double negative_slope) {
  return combine_lines(last_lines, mask, out_layer, negative_slope);
}

double integrate_affine_over_polygon(std::span<const Vec2> polygon, const AffineFn2& f) {
  if (polygon.size() < 3) {
    throw TooFewVertices("integrate: polygon needs at least 3 vertices");
  }
  const Vec2 v1 = polygon[0];
  const double c_prime = f.evaluate(v1);
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
    const double e2x = polygon[i].x - v1.x;
    const double e2y = polygon[i].y - v1.y;
    const double e3x = polygon[i + 1].x - v1.x;
    const double e3y = polygon[i + 1].y - v1.y;
    const double area = 0.5 * (e2x * e3y - e2y * e3x);
    const double a_prime = f.a * e2x + f.b * e2y;
    const double b_prime = f.a * e3x + f.b * e3y;
    total += (area / 3.0) * (a_prime + b_prime + 3.0 * c_prime);
  }
  return total;
}

void for_each_piece(const ConditionedSlice& slice, const PieceVisitor& visit,
                    IntegralResult* stats) {
  const Mlp& net = slice.mlp();
  const int depth_count = net.depth();
  if (depth_count > kMaxHiddenLayers) {
    throw LayerBudgetExceeded("integrate: more than 8 hidden layers");
  }
  const double slope = net.activation().negative_slope;

  if (stats) {
    stats->piece_count = 0;
    stats->per_layer_face_counts.assign(depth_count, 0);
  }

  // One arrangement workspace per hidden layer, reset and reused as the
  // traversal revisits each depth.
  std::vector<Dcel> dcels(depth_count);
  std::vector<std::size_t> trail(depth_count, 0);
  dcels[0].reset_unit_square();
  {
    const std::vector<AffineFn2> lines = first_layer_lines(slice);
    insert_lines(dcels[0], lines);
  }
  if (stats && depth_count > 1) stats->per_layer_face_counts[0] = dcels[0].inner_face_count();

  FacePiece piece;
  std::vector<Vec2> poly;
  int depth = 0;
  while (depth >= 0) {
    Dcel& dcel = dcels[depth];
    if (depth < depth_count - 1) {
      if (trail[depth] == dcel.inner_face_count()) {
        trail[depth] = 0;
        --depth;
        continue;
      }
      const Index face_id = dcel.inner_face_id(trail[depth]);
      const std::uint64_t mask = dcel.faces()[face_id].line_mask;
      dcel.face_polygon(face_id, poly);
      ++trail[depth];
      ++depth;
      dcels[depth].reset(poly);
      const std::vector<AffineFn2> lines =
          combine_lines(dcel.lines(), mask, net.hidden(depth), slope);
      insert_lines(dcels[depth], lines);
      if (stats && depth < depth_count - 1) {
        stats->per_layer_face_counts[depth] += dcels[depth].inner_face_count();
      }
    } else {
      for (std::size_t i = 0; i < dcel.inner_face_count(); ++i) {
        const Index face_id = dcel.inner_face_id(i);
        dcel.face_polygon(face_id, piece.polygon);
        piece.affine = output_affine(dcel.lines(), dcel.faces()[face_id].line_mask,
                                     net.output_layer(), slope);
        if (stats) {
          ++stats->piece_count;
          ++stats->per_layer_face_counts[depth];
        }
        visit(piece);
      }
      --depth;
    }
  }
}

std::vector<FacePiece> enumerate_pieces(const ConditionedSlice& slice) {
  std::vector<FacePiece> pieces;
  for_each_piece(slice, [&pieces](const FacePiece& piece) { pieces.push_back(piece); });
  return pieces;
}

IntegralResult integrate(const ConditionedSlice& slice) {
  IntegralResult result;
  result.G.assign(slice.mlp().output_dim(), 0.0);
  for_each_piece(
      slice,
      [&result](const FacePiece& piece) {
        for (std::size_t k = 0; k < piece.affine.size(); ++k) {
          result.G[k] += integrate_affine_over_polygon(piece.polygon, piece.affine[k]);
        }
      },
      &result);
  return result;
}

void write_pieces_csv(std::span<const FacePiece> pieces, const std::string& csv_path) {
  std::string out = "piece_id,vertex_count,vertices";
  const std::size_t channels = pieces.empty() ? 1 : pieces.front().affine.size();
  for (std::size_t k = 0; k < channels; ++k) {
    const std::string suffix = channels > 1 ? std::to_string(k) : std::string();
    out += ",a" + suffix + ",b" + suffix + ",c" + suffix;
  }
  out += '\n';
  for (std::size_t id = 0; id < pieces.size(); ++id) {
    const FacePiece& piece = pieces[id];
    out += std::to_string(id);
    out += ',';
    out += std::to_string(piece.polygon.size());
    out += ",\"";
    for (std::size_t v = 0; v < piece.polygon.size(); ++v) {
      if (v) out += ';';
      append_double(out, piece.polygon[v].x);
      out += ' ';
      append_double(out, piece.polygon[v].y);
    }
    out += '"';
    for (const AffineFn2& f : piece.affine) {
      out += ',';
      append_double(out, f.a);
      out += ',';
      append_double(out, f.b);
      out += ',';
      append_double(out, f.c);
    }
    out += '\n';
  }
  std::ofstream file(csv_path, std::ios::binary);
  if (!file) throw Error("pieces: cannot open " + csv_path + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

void dump_pieces(const ConditionedSlice& slice, const std::string& csv_path) {
  const std::vector<FacePiece> pieces = enumerate_pieces(slice);
  write_pieces_csv(pieces, csv_path);
}

void dump_pieces_svg(const ConditionedSlice& slice, const std::string& svg_path) {
  std::vector<std::vector<Vec2>> polygons;
  for_each_piece(slice, [&polygons](const FacePiece& piece) { polygons.push_back(piece.polygon); });
  write_polygon_svg(svg_path, polygons, true);
}

}  // namespace mlpcv
