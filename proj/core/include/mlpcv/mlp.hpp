#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mlpcv/errors.hpp"
#include "mlpcv/geometry.hpp"
#include "mlpcv/rng.hpp"

namespace mlpcv {

inline constexpr int kMaxHiddenLayers = 8;

struct ActivationSpec {
  enum class Kind { relu, leaky_relu };

  Kind kind = Kind::relu;
  double negative_slope = 0.0;  // 0 for relu, in (0,1) for leaky_relu

  double apply(double z) const { return z > 0.0 ? z : negative_slope * z; }
  double slope_at(double z) const { return z > 0.0 ? 1.0 : negative_slope; }

  static ActivationSpec relu() { return {Kind::relu, 0.0}; }
  static ActivationSpec leaky_relu(double slope) { return {Kind::leaky_relu, slope}; }
};

// Dense layer, weights row-major out_dim x in_dim.
struct Layer {
  int out_dim = 0;
  int in_dim = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double weight(int row, int col) const { return weights[static_cast<std::size_t>(row) * in_dim + col]; }
};

// Fully-connected network over [0,1]^2 with optional extra conditioning
// inputs. All hidden layers share one width N <= 64; at most 8 hidden
// layers; linear (identity) output. The inputs feed in the order
// (x, y, phi[0], .., phi[cond_dim-1]).
class Mlp {
 public:
  Mlp(std::vector<Layer> hidden, Layer output, ActivationSpec activation, int cond_dim);

  // He-uniform weights (limit sqrt(6/fan_in)), biases uniform in
  // +-1/sqrt(fan_in), drawn from Rng(seed) in layer order.
  static Mlp create(int hidden_layers, int width, int output_dim, int cond_dim,
                    ActivationSpec activation, std::uint64_t seed);

  // Feed-forward evaluation; phi.size() must equal cond_dim().
  std::vector<double> forward(double x, double y, std::span<const double> phi) const;

  int depth() const { return static_cast<int>(hidden_.size()); }
  int width() const { return hidden_.front().out_dim; }
  int output_dim() const { return output_.out_dim; }
  int cond_dim() const { return cond_dim_; }
  int input_dim() const { return 2 + cond_dim_; }
  const ActivationSpec& activation() const { return activation_; }
  const Layer& hidden(int i) const { return hidden_[i]; }
  const Layer& output_layer() const { return output_; }

  Layer& mutable_hidden(int i) { return hidden_[i]; }
  Layer& mutable_output_layer() { return output_; }

 private:
  std::vector<Layer> hidden_;
  Layer output_;
  ActivationSpec activation_;
  int cond_dim_ = 0;
};

// A 2D slice of the network for one fixed conditioning vector. The phi
// contribution is folded into the first layer's biases once, so evaluating
// the slice is bit-identical to evaluating an unconditioned network whose
// first-layer biases are b + W_phi * phi.
class ConditionedSlice {
 public:
  explicit ConditionedSlice(const Mlp& mlp, std::vector<double> phi = {});

  std::vector<double> forward(double x, double y) const;
  void forward(double x, double y, std::span<double> out) const;

  const Mlp& mlp() const { return *mlp_; }
  std::span<const double> phi() const { return phi_; }
  std::span<const double> folded_first_bias() const { return folded_bias_; }

 private:
  const Mlp* mlp_;
  std::vector<double> phi_;
  std::vector<double> folded_bias_;
};

// Zero sets of the first hidden layer's pre-activations: line i is
// {w_x(i), w_y(i), w_phi(i) . phi + b(i)}.
std::vector<AffineFn2> first_layer_lines(const ConditionedSlice& slice);

struct TrainConfig {
  int epochs = 5000;
  int batch_size = 4096;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 42;
};

// Training target: fills `out` (output_dim values) for a sample. The rng
// argument lets noisy single-sample targets stay reproducible.
using TrainTarget =
    std::function<void(double x, double y, std::span<const double> phi, Rng& rng, std::span<double> out)>;

// Convenience wrapper for deterministic scalar targets.
TrainTarget make_target(std::function<double(double, double)> f);

// Adam-optimized MSE regression against fresh uniform samples, one
// optimizer step per epoch. Returns the per-epoch loss trace (length
// cfg.epochs). Throws NonFiniteLoss if the loss leaves the reals and
// std::invalid_argument on a bad config.
std::vector<double> train(Mlp& mlp, const TrainTarget& target, const TrainConfig& cfg);

// Same optimizer driven by a fixed dataset; each batch resamples rows
// uniformly with replacement.
struct TrainRow {
  double x = 0.0;
  double y = 0.0;
  std::vector<double> values;
};
std::vector<double> train_on_rows(Mlp& mlp, std::span<const TrainRow> rows, const TrainConfig& cfg);

// JSON model document, schema:
//   {activation, negative_slope, input_dim, cond_dim,
//    hidden: [{weights: row-major N x fan_in, biases: [N]}, ...],
//    output: {weights: K x N, biases: [K]}}
// Numbers are decimal floats with round-trip precision.
std::string save_model(const Mlp& mlp);
Mlp load_model(const std::string& text);
void save_model_file(const Mlp& mlp, const std::string& path);
Mlp load_model_file(const std::string& path);

}  // namespace mlpcv
