#pragma once

// Simulation harness: chi-square(1) two-component mixtures, the true LFDR,
// error metrics over a (π₀, N) grid, the Pearson skewness diagnostic, and
// exact enumeration of small-N coverage probabilities.

#include <cfdr/distkit.hpp>
#include <cfdr/lfdr.hpp>
#include <cfdr/nfdr.hpp>
#include <cfdr/numerics.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cfdr::sim {

struct SimulatedDataset {
  std::vector<double> statistics;
  std::vector<std::uint8_t> truth_labels;  ///< A_i = 1 when the null is false
  std::vector<double> p_values;
  std::uint64_t seed = 0;  ///< seed that regenerates this dataset
};

/// N statistics, each drawn from χ²₁,₀ with probability π₀ (A_i = 0) and from
/// χ²₁,δ otherwise (A_i = 1), as (Z + √δ)² or Z² with Z standard normal.
inline SimulatedDataset generate_dataset(double pi0, std::size_t n, double delta, std::uint64_t seed) {
  dist::Chi2MixtureParams{pi0, delta}.validate();
  SimulatedDataset ds;
  ds.seed = seed;
  ds.statistics.reserve(n);
  ds.truth_labels.reserve(n);
  ds.p_values.reserve(n);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution false_null(1.0 - pi0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double shift = std::sqrt(delta);
  for (std::size_t i = 0; i < n; ++i) {
    const bool alt = false_null(rng);
    const double z = normal(rng) + (alt ? shift : 0.0);
    const double t = z * z;
    ds.truth_labels.push_back(alt ? 1 : 0);
    ds.statistics.push_back(t);
    ds.p_values.push_back(dist::chi2_1df_sf(t));
  }
  return ds;
}

/// φ(p) = π₀f₀(t) / (π₀f₀(t) + (1-π₀)f_δ(t)) with t the χ²₁ statistic whose
/// p-value is p. p = 0 returns the t → ∞ limit.
inline double true_lfdr(double p, double pi0, double delta) {
  dist::Chi2MixtureParams{pi0, delta}.validate();
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("true_lfdr: p outside [0,1]");
  if (pi0 == 1.0) return 1.0;
  if (pi0 == 0.0) return 0.0;
  if (delta == 0.0) return pi0;
  const double t = dist::chi2_1df_isf(p);
  if (std::isinf(t)) return 0.0;
  const double log_ratio = dist::noncentral_chi2_1df_log_likelihood_ratio(t, delta);
  // π₀ / (π₀ + (1-π₀)·e^{ln f_δ - ln f₀})
  const double log_alt = std::log1p(-pi0) + log_ratio - std::log(pi0);
  if (log_alt > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(log_alt));
}

/// 3·(mean - median)/sd with the n-1 variance.
inline double pearson_skewness(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::domain_error("pearson_skewness: need at least 2 samples");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(n - 1);
  if (!(var > 0.0)) throw std::domain_error("pearson_skewness: zero variance");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return 3.0 * (mean - median) / std::sqrt(var);
}

/// Pr(estimate(α, X, N) ≥ α/Π) for X ~ Binomial(N, Π), by enumeration over
/// x = 0..N. α/Π bounds the NFDR Π₀/Π when Π₀(𝒯_α) = α.
inline double exact_small_n_coverage(std::int64_t n, double alpha, double pi, nfdr::EstimatorKind kind,
                                     nfdr::EstimatorOptions opts = {.weight = std::nullopt, .mean_method = nfdr::Quadrature{}}) {
  if (n < 1 || n > 5) throw std::domain_error("exact_small_n_coverage: N must be in 1..5");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("exact_small_n_coverage: alpha outside (0,1]");
  if (!(pi >= alpha && pi <= 1.0))
    throw std::domain_error("exact_small_n_coverage: discovery probability below alpha");
  const double bound = alpha / pi;
  double coverage = 0.0;
  for (std::int64_t x = 0; x <= n; ++x) {
    const double est = nfdr::estimate(kind, alpha, x, n, opts).value;
    if (est >= bound) coverage += dist::binomial_pmf({n, pi}, x);
  }
  return coverage;
}

/// How per-hypothesis errors are aggregated in a grid cell.
enum class Pooling {
  pooled,          ///< over all (replicate, hypothesis) pairs at once
  replicate_mean   ///< per replicate first, then averaged over replicates
};

struct SimulationConfig {
  std::vector<double> pi0_grid{0.5, 0.75, 0.9, 1.0};
  std::vector<std::size_t> n_grid{2, 4, 8, 16, 32};
  double delta = 2.0;
  std::size_t replicates = 100;
  std::uint64_t seed = 20110401;
  std::vector<nfdr::EstimatorKind> estimators{nfdr::EstimatorKind::mle, nfdr::EstimatorKind::corrected_median,
                                              nfdr::EstimatorKind::posterior_mean};
  std::size_t mc_draws = 100;
  Pooling pooling = Pooling::pooled;
  unsigned threads = 1;

  void validate() const {
    if (pi0_grid.empty() || n_grid.empty()) throw std::invalid_argument("simulation: grids must be nonempty");
    if (estimators.empty()) throw std::invalid_argument("simulation: no estimators selected");
    if (replicates < 1) throw std::invalid_argument("simulation: replicates must be >= 1");
    if (mc_draws < 1) throw std::invalid_argument("simulation: mc_draws must be >= 1");
    for (double p : pi0_grid)
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("simulation: pi0 outside [0,1]");
    for (auto n : n_grid)
      if (n < 1) throw std::invalid_argument("simulation: N must be >= 1");
    if (!(delta >= 0.0)) throw std::invalid_argument("simulation: delta must be >= 0");
  }
};

struct MetricsRow {
  double pi0 = 0.0;
  std::size_t n = 0;
  nfdr::EstimatorKind estimator = nfdr::EstimatorKind::mle;
  double rmse = 0.0;
  double conservatism_proportion = 0.0;
  double bias = 0.0;
  std::size_t replicate_count = 0;
  std::size_t estimate_count = 0;
};

/// Per-(replicate, estimator) sums of estimate errors against the true LFDR.
struct ErrorSums {
  double squared = 0.0;
  double signed_ = 0.0;
  std::size_t conservative = 0;
  std::size_t count = 0;

  void add(double estimate, double truth) {
    const double d = estimate - truth;
    squared += d * d;
    signed_ += d;
    if (estimate >= truth) ++conservative;
    ++count;
  }
};

/// Seed of the dataset for grid cell (pi0 index, N index) and replicate.
inline std::uint64_t replicate_seed(std::uint64_t base, std::size_t pi0_index, std::size_t n_index,
                                    std::size_t replicate) {
  return numerics::derive_seed(base, {pi0_index, n_index, replicate});
}

/// One simulated replicate: true LFDRs and, per configured estimator, the
/// monotone estimates, both in dataset order.
struct ReplicateOutcome {
  SimulatedDataset dataset;
  std::vector<double> truth;
  std::vector<std::vector<double>> estimates;
};

inline ReplicateOutcome simulate_replicate(const SimulationConfig& config, double pi0, std::size_t n,
                                           std::uint64_t seed) {
  ReplicateOutcome out;
  out.dataset = generate_dataset(pi0, n, config.delta, seed);
  std::vector<lfdr::PValueEntry> entries;
  entries.reserve(n);
  out.truth.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    entries.push_back({std::to_string(i), out.dataset.p_values[i]});
    out.truth[i] = true_lfdr(out.dataset.p_values[i], pi0, config.delta);
  }
  const lfdr::PValueSet pvals(std::move(entries), numerics::derive_seed(seed, {1}));
  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    lfdr::LfdrOptions opts;
    opts.estimator.mean_method = nfdr::MonteCarlo{.draws = config.mc_draws};
    opts.seed = numerics::derive_seed(seed, {2, e});
    const auto res = lfdr::lfdr_estimates(pvals, config.estimators[e], opts);
    std::vector<double> est(n);
    for (const auto& entry : res.entries) est[pvals.index_at_rank(entry.rank)] = entry.monotone_estimate;
    out.estimates.push_back(std::move(est));
  }
  return out;
}

/// Error sums of each estimator's monotone estimates against the true LFDR.
inline std::vector<ErrorSums> score_replicate(const SimulationConfig& config, double pi0, std::size_t n,
                                              std::uint64_t seed) {
  const auto outcome = simulate_replicate(config, pi0, n, seed);
  std::vector<ErrorSums> sums(outcome.estimates.size());
  for (std::size_t e = 0; e < sums.size(); ++e)
    for (std::size_t i = 0; i < n; ++i) sums[e].add(outcome.estimates[e][i], outcome.truth[i]);
  return sums;
}

namespace detail {

inline MetricsRow summarize(const SimulationConfig& config, double pi0, std::size_t n,
                            nfdr::EstimatorKind kind, std::span<const ErrorSums> reps) {
  MetricsRow row{.pi0 = pi0, .n = n, .estimator = kind, .replicate_count = reps.size()};
  if (config.pooling == Pooling::pooled) {
    ErrorSums total;
    for (const auto& r : reps) {
      total.squared += r.squared;
      total.signed_ += r.signed_;
      total.conservative += r.conservative;
      total.count += r.count;
    }
    const double c = static_cast<double>(total.count);
    row.rmse = std::sqrt(total.squared / c);
    row.bias = total.signed_ / c;
    row.conservatism_proportion = static_cast<double>(total.conservative) / c;
    row.estimate_count = total.count;
  } else {
    for (const auto& r : reps) {
      const double c = static_cast<double>(r.count);
      row.rmse += std::sqrt(r.squared / c);
      row.bias += r.signed_ / c;
      row.conservatism_proportion += static_cast<double>(r.conservative) / c;
      row.estimate_count += r.count;
    }
    const double m = static_cast<double>(reps.size());
    row.rmse /= m;
    row.bias /= m;
    row.conservatism_proportion /= m;
  }
  return row;
}

}  // namespace detail

/// Runs every (π₀, N) cell for every estimator. Rows are ordered by π₀ index,
/// then N index, then estimator; the table is independent of `threads`.
inline std::vector<MetricsRow> run_grid(const SimulationConfig& config) {
  config.validate();
  const std::size_t n_pi0 = config.pi0_grid.size();
  const std::size_t n_n = config.n_grid.size();
  const std::size_t reps = config.replicates;
  const std::size_t units = n_pi0 * n_n * reps;
  std::vector<std::vector<ErrorSums>> scored(units);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u = next.fetch_add(1); u < units; u = next.fetch_add(1)) {
      const std::size_t rep = u % reps;
      const std::size_t cell = u / reps;
      const std::size_t i_n = cell % n_n;
      const std::size_t i_pi0 = cell / n_n;
      scored[u] = score_replicate(config, config.pi0_grid[i_pi0], config.n_grid[i_n],
                                  replicate_seed(config.seed, i_pi0, i_n, rep));
    }
  };
  const unsigned threads = std::max(1u, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<MetricsRow> rows;
  std::vector<ErrorSums> per_rep(reps);
  for (std::size_t i_pi0 = 0; i_pi0 < n_pi0; ++i_pi0)
    for (std::size_t i_n = 0; i_n < n_n; ++i_n)
      for (std::size_t e = 0; e < config.estimators.size(); ++e) {
        const std::size_t base = (i_pi0 * n_n + i_n) * reps;
        for (std::size_t r = 0; r < reps; ++r) per_rep[r] = scored[base + r][e];
        rows.push_back(detail::summarize(config, config.pi0_grid[i_pi0], config.n_grid[i_n],
                                         config.estimators[e], per_rep));
      }
  return rows;
}

}  // namespace cfdr::sim
