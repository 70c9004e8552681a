#include "mlpcv/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mlpcv {

namespace {

void validate_activation(const ActivationSpec& act) {
  if (act.kind == ActivationSpec::Kind::relu) {
    if (act.negative_slope != 0.0) {
      throw UnsupportedActivation("mlp: relu requires negative_slope = 0");
    }
  } else {
    if (!(act.negative_slope > 0.0 && act.negative_slope < 1.0)) {
      throw UnsupportedActivation("mlp: leaky_relu requires negative_slope in (0,1)");
    }
  }
}

void check_layer_shape(const Layer& layer, const char* what) {
  if (layer.out_dim <= 0 || layer.in_dim <= 0 ||
      layer.weights.size() != static_cast<std::size_t>(layer.out_dim) * layer.in_dim ||
      layer.biases.size() != static_cast<std::size_t>(layer.out_dim)) {
    throw DimensionMismatch(std::string("mlp: inconsistent ") + what + " layer shape");
  }
}

}  // namespace

Mlp::Mlp(std::vector<Layer> hidden, Layer output, ActivationSpec activation, int cond_dim)
    : hidden_(std::move(hidden)), output_(std::move(output)), activation_(activation), cond_dim_(cond_dim) {
  validate_activation(activation_);
  if (cond_dim_ < 0) {
    throw DimensionMismatch("mlp: negative cond_dim");
  }
  if (hidden_.empty()) {
    throw DimensionMismatch("mlp: at least one hidden layer required");
  }
  if (static_cast<int>(hidden_.size()) > kMaxHiddenLayers) {
    throw LayerBudgetExceeded("mlp: more than 8 hidden layers");
  }
  const int width = hidden_.front().out_dim;
  if (width > kMaskCapacity) {
    throw MaskOverflow("mlp: hidden width above 64");
  }
  for (std::size_t i = 0; i < hidden_.size(); ++i) {
    check_layer_shape(hidden_[i], "hidden");
    if (hidden_[i].out_dim != width) {
      throw DimensionMismatch("mlp: hidden layers must share one width");
    }
    const int expect_in = (i == 0) ? 2 + cond_dim_ : width;
    if (hidden_[i].in_dim != expect_in) {
      throw DimensionMismatch("mlp: hidden layer fan-in does not chain");
    }
  }
  check_layer_shape(output_, "output");
  if (output_.in_dim != width) {
    throw DimensionMismatch("mlp: output fan-in differs from hidden width");
  }
}

Mlp Mlp::create(int hidden_layers, int width, int output_dim, int cond_dim,
                ActivationSpec activation, std::uint64_t seed) {
  if (hidden_layers < 1) throw DimensionMismatch("mlp: need at least one hidden layer");
  if (width < 1) throw DimensionMismatch("mlp: need positive width");
  if (output_dim < 1) throw DimensionMismatch("mlp: need at least one output");
  Rng rng(seed);
  auto init_layer = [&rng](int out_dim, int in_dim) {
    Layer layer;
    layer.out_dim = out_dim;
    layer.in_dim = in_dim;
    layer.weights.resize(static_cast<std::size_t>(out_dim) * in_dim);
    layer.biases.resize(out_dim);
    const double w_limit = std::sqrt(6.0 / in_dim);
    const double b_limit = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (double& w : layer.weights) w = rng.uniform(-w_limit, w_limit);
    for (double& b : layer.biases) b = rng.uniform(-b_limit, b_limit);
    return layer;
  };

  std::vector<Layer> hidden;
  hidden.reserve(hidden_layers);
  hidden.push_back(init_layer(width, 2 + cond_dim));
  for (int i = 1; i < hidden_layers; ++i) hidden.push_back(init_layer(width, width));
  Layer output = init_layer(output_dim, width);
  return Mlp(std::move(hidden), std::move(output), activation, cond_dim);
}

std::vector<double> Mlp::forward(double x, double y, std::span<const double> phi) const {
  if (static_cast<int>(phi.size()) != cond_dim_) {
    throw DimensionMismatch("mlp: phi length differs from cond_dim");
  }
  double buf_a[kMaskCapacity];
  double buf_b[kMaskCapacity];
  double* cur = buf_a;
  double* nxt = buf_b;

  const Layer& first = hidden_.front();
  for (int i = 0; i < first.out_dim; ++i) {
    double acc = first.biases[i];
    const double* w = first.weights.data() + static_cast<std::size_t>(i) * first.in_dim;
    acc += w[0] * x;
    acc += w[1] * y;
    for (int c = 0; c < cond_dim_; ++c) acc += w[2 + c] * phi[c];
    cur[i] = activation_.apply(acc);
  }
  for (std::size_t l = 1; l < hidden_.size(); ++l) {
    const Layer& layer = hidden_[l];
    for (int i = 0; i < layer.out_dim; ++i) {
      double acc = layer.biases[i];
      const double* w = layer.weights.data() + static_cast<std::size_t>(i) * layer.in_dim;
      for (int j = 0; j < layer.in_dim; ++j) acc += w[j] * cur[j];
      nxt[i] = activation_.apply(acc);
    }
    std::swap(cur, nxt);
  }

  std::vector<double> out(output_.out_dim);
  for (int k = 0; k < output_.out_dim; ++k) {
    double acc = output_.biases[k];
    const double* w = output_.weights.data() + static_cast<std::size_t>(k) * output_.in_dim;
    for (int j = 0; j < output_.in_dim; ++j) acc += w[j] * cur[j];
    out[k] = acc;
  }
  return out;
}

ConditionedSlice::ConditionedSlice(const Mlp& mlp, std::vector<double> phi)
    : mlp_(&mlp), phi_(std::move(phi)) {
  if (static_cast<int>(phi_.size()) != mlp.cond_dim()) {
    throw DimensionMismatch("slice: phi length differs from cond_dim");
  }
  const Layer& first = mlp.hidden(0);
  folded_bias_.resize(first.out_dim);
  for (int i = 0; i < first.out_dim; ++i) {
    double fold = first.biases[i];
    const double* w = first.weights.data() + static_cast<std::size_t>(i) * first.in_dim;
    for (std::size_t c = 0; c < phi_.size(); ++c) fold += w[2 + c] * phi_[c];
    folded_bias_[i] = fold;
  }
}

void ConditionedSlice::forward(double x, double y, std::span<double> out) const {
  const Mlp& net = *mlp_;
  if (out.size() != static_cast<std::size_t>(net.output_dim())) {
    throw DimensionMismatch("slice: output span has wrong length");
  }
  const ActivationSpec& act = net.activation();
  double buf_a[kMaskCapacity];
  double buf_b[kMaskCapacity];
  double* cur = buf_a;
  double* nxt = buf_b;

  const Layer& first = net.hidden(0);
  for (int i = 0; i < first.out_dim; ++i) {
    double acc = folded_bias_[i];
    const double* w = first.weights.data() + static_cast<std::size_t>(i) * first.in_dim;
    acc += w[0] * x;
    acc += w[1] * y;
    cur[i] = act.apply(acc);
  }
  for (int l = 1; l < net.depth(); ++l) {
    const Layer& layer = net.hidden(l);
    for (int i = 0; i < layer.out_dim; ++i) {
      double acc = layer.biases[i];
      const double* w = layer.weights.data() + static_cast<std::size_t>(i) * layer.in_dim;
      for (int j = 0; j < layer.in_dim; ++j) acc += w[j] * cur[j];
      nxt[i] = act.apply(acc);
    }
    std::swap(cur, nxt);
  }
  const Layer& last = net.output_layer();
  for (int k = 0; k < last.out_dim; ++k) {
    double acc = last.biases[k];
    const double* w = last.weights.data() + static_cast<std::size_t>(k) * last.in_dim;
    for (int j = 0; j < last.in_dim; ++j) acc += w[j] * cur[j];
    out[k] = acc;
  }
}

std::vector<double> ConditionedSlice::forward(double x, double y) const {
  std::vector<double> out(mlp_->output_dim());
  forward(x, y, out);
  return out;
}

std::vector<AffineFn2> first_layer_lines(const ConditionedSlice& slice) {
  const Layer& first = slice.mlp().hidden(0);
  std::span<const double> fold = slice.folded_first_bias();
  std::vector<AffineFn2> lines(first.out_dim);
  for (int i = 0; i < first.out_dim; ++i) {
    const double* w = first.weights.data() + static_cast<std::size_t>(i) * first.in_dim;
    lines[i] = {w[0], w[1], fold[i]};
  }
  return lines;
}

TrainTarget make_target(std::function<double(double, double)> f) {
  return [f = std::move(f)](double x, double y, std::span<const double>, Rng&, std::span<double> out) {
    out[0] = f(x, y);
  };
}

}  // namespace mlpcv
