#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mlpcv/geometry.hpp"
#include "mlpcv/mlp.hpp"

namespace mlpcv {

// A leaf face of the full multi-layer subdivision together with the affine
// function(s) the network equals on it: affine[k](p) == slice.forward(p)[k]
// for every p inside the polygon.
struct FacePiece {
  std::vector<Vec2> polygon;       // convex, CCW
  std::vector<AffineFn2> affine;   // one per output channel
};

struct IntegralResult {
  std::vector<double> G;                          // exact integral per channel
  std::size_t piece_count = 0;                    // leaf faces
  std::vector<std::size_t> per_layer_face_counts; // faces enumerated per depth
};

// Next-layer pre-activation lines: line i = sum_j s_j * w[i,j] * prev[j] + b_i
// where s_j is 1 when mask bit j is set and negative_slope otherwise.
std::vector<AffineFn2> combine_lines(std::span<const AffineFn2> prev_lines, std::uint64_t mask,
                                     const Layer& layer, double negative_slope);

// Same combination driven by the output layer (identity output activation),
// one affine function per output channel.
std::vector<AffineFn2> output_affine(std::span<const AffineFn2> last_lines, std::uint64_t mask,
                                     const Layer& out_layer, double negative_slope);

// Exact integral of an affine function over a convex CCW polygon via the fan
// triangulation anchored at vertex 0; each triangle contributes
// (A_T/3) * (a' + b' + 3c') in unit-triangle coordinates.
double integrate_affine_over_polygon(std::span<const Vec2> polygon, const AffineFn2& f);

using PieceVisitor = std::function<void(const FacePiece&)>;

// Visits every leaf face of the recursive subdivision exactly once. The
// traversal is stackless: one arrangement workspace per hidden layer plus a
// face cursor per depth. The visitor receives a reused buffer; copy to keep.
void for_each_piece(const ConditionedSlice& slice, const PieceVisitor& visit,
                    IntegralResult* stats = nullptr);

std::vector<FacePiece> enumerate_pieces(const ConditionedSlice& slice);

// G[k] = sum over pieces of the exact affine integral for channel k.
IntegralResult integrate(const ConditionedSlice& slice);

// CSV rows: piece_id, vertex_count, "x0 y0;x1 y1;...", then a,b,c per channel.
void dump_pieces(const ConditionedSlice& slice, const std::string& csv_path);
void write_pieces_csv(std::span<const FacePiece> pieces, const std::string& csv_path);

// Fig-style subdivision image of the leaf pieces.
void dump_pieces_svg(const ConditionedSlice& slice, const std::string& svg_path);

}  // namespace mlpcv
