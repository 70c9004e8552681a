#include "mlpcv/estimators.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "mlpcv/format.hpp"

namespace mlpcv {

namespace {

// Streaming per-channel mean and unbiased variance.
struct Accumulator {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::size_t count = 0;

  explicit Accumulator(std::size_t channels) : sum(channels, 0.0), sum_sq(channels, 0.0) {}

  void add(std::span<const double> values) {
    for (std::size_t k = 0; k < sum.size(); ++k) {
      sum[k] += values[k];
      sum_sq[k] += values[k] * values[k];
    }
    ++count;
  }

  std::vector<double> mean() const {
    std::vector<double> out(sum.size());
    for (std::size_t k = 0; k < sum.size(); ++k) out[k] = sum[k] / static_cast<double>(count);
    return out;
  }

  // Unbiased sample variance of the accumulated values (0 when count < 2).
  std::vector<double> variance() const {
    std::vector<double> out(sum.size(), 0.0);
    if (count < 2) return out;
    const double n = static_cast<double>(count);
    for (std::size_t k = 0; k < sum.size(); ++k) {
      const double m = sum[k] / n;
      double v = (sum_sq[k] - n * m * m) / (n - 1.0);
      out[k] = v > 0.0 ? v : 0.0;
    }
    return out;
  }
};

void check_finite(std::span<const double> G) {
  for (double g : G) {
    if (!std::isfinite(g)) throw std::invalid_argument("estimator: non-finite control integral G");
  }
}

void eval_integrand(const Integrand& f, double x, double y, Rng& rng, std::span<double> out) {
  if (f.noisy_eval) {
    f.noisy_eval(x, y, rng, out);
  } else {
    f.eval(x, y, out);
  }
}

EstimatorReport finish_single(const Accumulator& acc) {
  EstimatorReport report;
  report.n = acc.count;
  report.estimate = acc.mean();
  report.empirical_variance = acc.variance();
  for (double& v : report.empirical_variance) v /= static_cast<double>(acc.count);
  return report;
}

}  // namespace

Integrand make_integrand(std::function<double(double, double)> f) {
  Integrand out;
  out.output_dim = 1;
  out.eval = [f = std::move(f)](double x, double y, std::span<double> values) {
    values[0] = f(x, y);
  };
  return out;
}

EstimatorReport mc_estimate(const Integrand& f, const EstimatorConfig& cfg) {
  if (cfg.n_samples < 1) throw std::invalid_argument("mc_estimate: n_samples must be >= 1");
  const std::size_t channels = f.output_dim;
  Accumulator acc(channels);
  std::vector<double> value(channels);
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    eval_integrand(f, x, y, rng, value);
    acc.add(value);
  }
  return finish_single(acc);
}

EstimatorReport cv_estimate(const Integrand& f, const ConditionedSlice& slice,
                            std::span<const double> G, const EstimatorConfig& cfg) {
  if (cfg.n_samples < 1) throw std::invalid_argument("cv_estimate: n_samples must be >= 1");
  check_finite(G);
  const std::size_t channels = f.output_dim;
  if (G.size() != channels || slice.mlp().output_dim() != f.output_dim) {
    throw DimensionMismatch("cv_estimate: channel counts disagree");
  }
  Accumulator acc(channels);
  std::vector<double> value(channels);
  std::vector<double> g_value(channels);
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    eval_integrand(f, x, y, rng, value);
    slice.forward(x, y, g_value);
    for (std::size_t k = 0; k < channels; ++k) {
      value[k] = cfg.alpha * G[k] + value[k] - cfg.alpha * g_value[k];
    }
    acc.add(value);
  }
  return finish_single(acc);
}

EstimatorReport combined_estimate(const Integrand& f, const ConditionedSlice& slice,
                                  std::span<const double> G, std::size_t m, std::size_t n,
                                  std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("combined_estimate: n must be >= 1");
  check_finite(G);
  const std::size_t channels = f.output_dim;
  Accumulator mc_acc(channels);
  Accumulator cv_acc(channels);
  std::vector<double> value(channels);
  std::vector<double> g_value(channels);
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    eval_integrand(f, x, y, rng, value);
    mc_acc.add(value);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    eval_integrand(f, x, y, rng, value);
    slice.forward(x, y, g_value);
    for (std::size_t k = 0; k < channels; ++k) value[k] = G[k] + value[k] - g_value[k];
    cv_acc.add(value);
  }

  const double wm = static_cast<double>(m) / static_cast<double>(m + n);
  const double wn = static_cast<double>(n) / static_cast<double>(m + n);
  EstimatorReport report;
  report.n = m + n;
  report.estimate.resize(channels);
  report.empirical_variance.resize(channels);
  const std::vector<double> cv_mean = cv_acc.mean();
  const std::vector<double> cv_var = cv_acc.variance();
  std::vector<double> mc_mean(channels, 0.0);
  std::vector<double> mc_var(channels, 0.0);
  if (m > 0) {
    mc_mean = mc_acc.mean();
    mc_var = mc_acc.variance();
  }
  for (std::size_t k = 0; k < channels; ++k) {
    report.estimate[k] = wm * mc_mean[k] + wn * cv_mean[k];
    const double mc_term = m > 0 ? wm * wm * mc_var[k] / static_cast<double>(m) : 0.0;
    report.empirical_variance[k] = mc_term + wn * wn * cv_var[k] / static_cast<double>(n);
  }
  return report;
}

std::vector<std::size_t> dyadic_counts(std::size_t max) {
  std::vector<std::size_t> counts;
  for (std::size_t n = 1; n <= max; n *= 2) counts.push_back(n);
  return counts;
}

std::vector<SweepRow> convergence_sweep(const Integrand& f, const ConditionedSlice* slice,
                                        std::span<const double> G, const SweepConfig& cfg,
                                        std::span<const double> reference) {
  if (cfg.trials < 2) throw std::invalid_argument("sweep: trials must be >= 2");
  const std::size_t channels = f.output_dim;
  std::vector<SweepRow> rows;

  const int estimator_count = slice ? 2 : 1;
  for (int which = 0; which < estimator_count; ++which) {
    for (std::size_t ci = 0; ci < cfg.sample_counts.size(); ++ci) {
      const std::size_t n = cfg.sample_counts[ci];
      Accumulator across(channels);
      Accumulator sq_err(channels);
      std::vector<double> err(channels);
      for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t stream = static_cast<std::uint64_t>(ci) * cfg.trials + t;
        EstimatorConfig run_cfg;
        run_cfg.n_samples = n;
        run_cfg.seed = 0;  // unused below; streams come from (seed, stream)
        Rng derived(cfg.seed, stream);
        // Re-seed a throwaway config path: estimators take a seed, so expose
        // the derived stream through a private constructor-equivalent trick:
        // draw a fresh 64-bit seed from the derived stream.
        run_cfg.seed = derived.next_u64();
        const EstimatorReport report =
            which == 0 ? mc_estimate(f, run_cfg) : cv_estimate(f, *slice, G, run_cfg);
        across.add(report.estimate);
        if (!reference.empty()) {
          for (std::size_t k = 0; k < channels; ++k) {
            const double d = report.estimate[k] - reference[k];
            err[k] = d * d;
          }
          sq_err.add(err);
        }
      }
      SweepRow row;
      row.estimator = which == 0 ? "mc" : "cv";
      row.n_samples = n;
      row.trial_count = cfg.trials;
      row.mean = across.mean();
      row.variance = across.variance();
      if (!reference.empty()) row.mse = sq_err.mean();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string convergence_csv(std::span<const SweepRow> rows, std::uint64_t seed) {
  std::string out = "# seed=" + std::to_string(seed) + "\n";
  out += "estimator,n_samples,trial_count,mean,variance,mse\n";
  for (const SweepRow& row : rows) {
    const std::size_t channels = row.mean.size();
    for (std::size_t k = 0; k < channels; ++k) {
      out += row.estimator;
      if (channels > 1) out += "[" + std::to_string(k) + "]";
      out += ',';
      out += std::to_string(row.n_samples);
      out += ',';
      out += std::to_string(row.trial_count);
      out += ',';
      append_double(out, row.mean[k]);
      out += ',';
      append_double(out, row.variance[k]);
      out += ',';
      if (!row.mse.empty()) append_double(out, row.mse[k]);
      out += '\n';
    }
  }
  return out;
}

void write_convergence_csv(std::span<const SweepRow> rows, std::uint64_t seed,
                           const std::string& path) {
  const std::string text = convergence_csv(rows, seed);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("csv: cannot open " + path + " for writing");
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace mlpcv
