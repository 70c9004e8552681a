#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlpcv/mlp.hpp"

namespace mlpcv {

namespace {

struct LayerGrad {
  std::vector<double> weights;
  std::vector<double> biases;

  void match(const Layer& layer) {
    weights.assign(layer.weights.size(), 0.0);
    biases.assign(layer.biases.size(), 0.0);
  }
  void zero() {
    weights.assign(weights.size(), 0.0);
    biases.assign(biases.size(), 0.0);
  }
};

struct AdamState {
  LayerGrad m;
  LayerGrad v;
  void match(const Layer& layer) {
    m.match(layer);
    v.match(layer);
  }
};

void adam_update(std::vector<double>& params, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, const TrainConfig& cfg,
                 double bias1, double bias2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grad[i];
    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  if (!(cfg.adam_beta1 > 0.0 && cfg.adam_beta1 < 1.0) ||
      !(cfg.adam_beta2 > 0.0 && cfg.adam_beta2 < 1.0)) {
    throw std::invalid_argument("train: adam betas must lie in (0,1)");
  }
}

// One fresh sample per call: fills the inputs and the regression target.
using SampleSource = std::function<void(Rng& rng, double& x, double& y, std::span<double> phi,
                                        std::span<double> target)>;

std::vector<double> run_training(Mlp& mlp, const SampleSource& source, const TrainConfig& cfg) {
  validate_config(cfg);

  const int depth = mlp.depth();
  const int width = mlp.width();
  const int out_dim = mlp.output_dim();
  const int cond = mlp.cond_dim();

  std::vector<LayerGrad> hidden_grad(depth);
  std::vector<AdamState> hidden_adam(depth);
  for (int l = 0; l < depth; ++l) {
    hidden_grad[l].match(mlp.hidden(l));
    hidden_adam[l].match(mlp.hidden(l));
  }
  LayerGrad out_grad;
  AdamState out_adam;
  out_grad.match(mlp.output_layer());
  out_adam.match(mlp.output_layer());

  // Per-sample forward state: post-activations and activation slopes.
  std::vector<std::vector<double>> act(depth, std::vector<double>(width));
  std::vector<std::vector<double>> slope(depth, std::vector<double>(width));
  std::vector<double> out(out_dim);
  std::vector<double> target(out_dim);
  std::vector<double> delta_out(out_dim);
  std::vector<double> delta(width);
  std::vector<double> delta_prev(width);
  std::vector<double> phi(cond);

  Rng rng(cfg.seed);
  const ActivationSpec& activation = mlp.activation();
  std::vector<double> trace(cfg.epochs);
  const double inv_bk = 1.0 / (static_cast<double>(cfg.batch_size) * out_dim);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int l = 0; l < depth; ++l) hidden_grad[l].zero();
    out_grad.zero();
    double loss = 0.0;

    for (int s = 0; s < cfg.batch_size; ++s) {
      double x = 0.0;
      double y = 0.0;
      source(rng, x, y, phi, target);

      // forward
      {
        const Layer& first = mlp.hidden(0);
        for (int i = 0; i < width; ++i) {
          double z = first.biases[i];
          const double* w = first.weights.data() + static_cast<std::size_t>(i) * first.in_dim;
          z += w[0] * x;
          z += w[1] * y;
          for (int c = 0; c < cond; ++c) z += w[2 + c] * phi[c];
          act[0][i] = activation.apply(z);
          slope[0][i] = activation.slope_at(z);
        }
      }
      for (int l = 1; l < depth; ++l) {
        const Layer& layer = mlp.hidden(l);
        const std::vector<double>& prev = act[l - 1];
        for (int i = 0; i < width; ++i) {
          double z = layer.biases[i];
          const double* w = layer.weights.data() + static_cast<std::size_t>(i) * width;
          for (int j = 0; j < width; ++j) z += w[j] * prev[j];
          act[l][i] = activation.apply(z);
          slope[l][i] = activation.slope_at(z);
        }
      }
      {
        const Layer& last = mlp.output_layer();
        const std::vector<double>& prev = act[depth - 1];
        for (int k = 0; k < out_dim; ++k) {
          double z = last.biases[k];
          const double* w = last.weights.data() + static_cast<std::size_t>(k) * width;
          for (int j = 0; j < width; ++j) z += w[j] * prev[j];
          out[k] = z;
        }
      }

      // backward
      for (int k = 0; k < out_dim; ++k) {
        const double err = out[k] - target[k];
        loss += err * err;
        delta_out[k] = 2.0 * err * inv_bk;
      }
      {
        const Layer& last = mlp.output_layer();
        const std::vector<double>& prev = act[depth - 1];
        for (int j = 0; j < width; ++j) delta[j] = 0.0;
        for (int k = 0; k < out_dim; ++k) {
          const double d = delta_out[k];
          const double* w = last.weights.data() + static_cast<std::size_t>(k) * width;
          double* gw = out_grad.weights.data() + static_cast<std::size_t>(k) * width;
          for (int j = 0; j < width; ++j) {
            gw[j] += d * prev[j];
            delta[j] += w[j] * d;
          }
          out_grad.biases[k] += d;
        }
        for (int j = 0; j < width; ++j) delta[j] *= slope[depth - 1][j];
      }
      for (int l = depth - 1; l >= 1; --l) {
        const Layer& layer = mlp.hidden(l);
        const std::vector<double>& prev = act[l - 1];
        for (int j = 0; j < width; ++j) delta_prev[j] = 0.0;
        for (int i = 0; i < width; ++i) {
          const double d = delta[i];
          const double* w = layer.weights.data() + static_cast<std::size_t>(i) * width;
          double* gw = hidden_grad[l].weights.data() + static_cast<std::size_t>(i) * width;
          for (int j = 0; j < width; ++j) {
            gw[j] += d * prev[j];
            delta_prev[j] += w[j] * d;
          }
          hidden_grad[l].biases[i] += d;
        }
        for (int j = 0; j < width; ++j) delta[j] = delta_prev[j] * slope[l - 1][j];
      }
      {
        const Layer& first = mlp.hidden(0);
        for (int i = 0; i < width; ++i) {
          const double d = delta[i];
          double* gw = hidden_grad[0].weights.data() + static_cast<std::size_t>(i) * first.in_dim;
          gw[0] += d * x;
          gw[1] += d * y;
          for (int c = 0; c < cond; ++c) gw[2 + c] += d * phi[c];
          hidden_grad[0].biases[i] += d;
        }
      }
    }

    loss *= inv_bk;
    if (!std::isfinite(loss)) {
      throw NonFiniteLoss("train: loss became non-finite at epoch " + std::to_string(epoch));
    }
    trace[epoch] = loss;

    const int t = epoch + 1;
    const double bias1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.adam_beta2, t);
    for (int l = 0; l < depth; ++l) {
      Layer& layer = mlp.mutable_hidden(l);
      adam_update(layer.weights, hidden_grad[l].weights, hidden_adam[l].m.weights,
                  hidden_adam[l].v.weights, cfg, bias1, bias2);
      adam_update(layer.biases, hidden_grad[l].biases, hidden_adam[l].m.biases,
                  hidden_adam[l].v.biases, cfg, bias1, bias2);
    }
    Layer& last = mlp.mutable_output_layer();
    adam_update(last.weights, out_grad.weights, out_adam.m.weights, out_adam.v.weights, cfg, bias1,
                bias2);
    adam_update(last.biases, out_grad.biases, out_adam.m.biases, out_adam.v.biases, cfg, bias1,
                bias2);
  }
  return trace;
}

}  // namespace

std::vector<double> train(Mlp& mlp, const TrainTarget& target, const TrainConfig& cfg) {
  if (!target) throw std::invalid_argument("train: null target");
  SampleSource source = [&target](Rng& rng, double& x, double& y, std::span<double> phi,
                                  std::span<double> out) {
    x = rng.uniform();
    y = rng.uniform();
    for (double& p : phi) p = rng.uniform();
    target(x, y, phi, rng, out);
  };
  return run_training(mlp, source, cfg);
}

std::vector<double> train_on_rows(Mlp& mlp, std::span<const TrainRow> rows, const TrainConfig& cfg) {
  if (rows.empty()) throw std::invalid_argument("train: empty dataset");
  if (mlp.cond_dim() != 0) {
    throw DimensionMismatch("train: datasets carry no conditioning inputs");
  }
  for (const TrainRow& row : rows) {
    if (row.values.size() != static_cast<std::size_t>(mlp.output_dim())) {
      throw DimensionMismatch("train: dataset value arity differs from output_dim");
    }
  }
  SampleSource source = [rows](Rng& rng, double& x, double& y, std::span<double>,
                               std::span<double> out) {
    const TrainRow& row = rows[rng.uniform_int(rows.size())];
    x = row.x;
    y = row.y;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = row.values[k];
  };
  return run_training(mlp, source, cfg);
}

}  // namespace mlpcv
