#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mlpcv/mlp.hpp"
#include "mlpcv/rng.hpp"

namespace mlpcv {

// Integrand over the unit square. eval fills one value per output channel.
// noisy_eval, when present, is an unbiased single-sample estimate of eval
// that may consume randomness from the caller's stream.
struct Integrand {
  int output_dim = 1;
  std::function<void(double x, double y, std::span<double> out)> eval;
  std::function<void(double x, double y, Rng& rng, std::span<double> out)> noisy_eval;
};

Integrand make_integrand(std::function<double(double, double)> f);

struct EstimatorConfig {
  std::size_t n_samples = 0;
  double alpha = 1.0;  // fixed at 1; kept as a recorded config field
  std::uint64_t seed = 42;
};

struct EstimatorReport {
  std::vector<double> estimate;
  std::size_t n = 0;
  // Variance of the estimator itself (sample variance of the per-sample
  // values divided by n) for single runs; across-trial variance in sweeps.
  std::vector<double> empirical_variance;
  std::vector<double> mse_vs_reference;  // empty when no reference was given
};

// Vanilla Monte Carlo: (1/n) sum f(x_i, y_i), uniform samples from the seed.
EstimatorReport mc_estimate(const Integrand& f, const EstimatorConfig& cfg);

// Control variates with exact G: alpha*G + (1/n) sum [f(x_i) - alpha*g(x_i)],
// g = slice.forward, p = 1 on the unit square. G is caller-supplied and must
// be finite (normally integrate(slice).G).
EstimatorReport cv_estimate(const Integrand& f, const ConditionedSlice& slice,
                            std::span<const double> G, const EstimatorConfig& cfg);

// Weighted average m/(m+n) * MC + n/(m+n) * CV on disjoint sample sets drawn
// from one stream (the m vanilla samples first). m = 0 collapses to
// cv_estimate with identical draws.
EstimatorReport combined_estimate(const Integrand& f, const ConditionedSlice& slice,
                                  std::span<const double> G, std::size_t m, std::size_t n,
                                  std::uint64_t seed);

struct SweepConfig {
  std::vector<std::size_t> sample_counts;
  int trials = 128;
  std::uint64_t seed = 42;
};

// Dyadic counts 1, 2, 4, ..., max.
std::vector<std::size_t> dyadic_counts(std::size_t max);

struct SweepRow {
  std::string estimator;
  std::size_t n_samples = 0;
  int trial_count = 0;
  std::vector<double> mean;      // per channel, across trials
  std::vector<double> variance;  // unbiased across-trial variance
  std::vector<double> mse;       // vs reference; empty when none given
};

// Runs `trials` independent replications per sample count for vanilla MC and
// (when a slice is given) the control-variate estimator. Trial t of count
// index ci draws from the derived stream (seed, ci*trials + t); both
// estimators share the stream, so comparisons are paired.
std::vector<SweepRow> convergence_sweep(const Integrand& f, const ConditionedSlice* slice,
                                        std::span<const double> G, const SweepConfig& cfg,
                                        std::span<const double> reference);

// CSV: "# seed=..." comment, then estimator,n_samples,trial_count,mean,variance,mse
// with one row per (estimator, count[, channel]).
std::string convergence_csv(std::span<const SweepRow> rows, std::uint64_t seed);
void write_convergence_csv(std::span<const SweepRow> rows, std::uint64_t seed,
                           const std::string& path);

}  // namespace mlpcv
