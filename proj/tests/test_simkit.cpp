#include <catch_amalgamated.hpp>

#include <cfdr/simkit.hpp>

#include "oracles.hpp"

#include <algorithm>

using namespace cfdr;
using namespace cfdr::sim;
using Catch::Matchers::WithinAbs;

namespace {

SimulationConfig small_config() {
  SimulationConfig c;
  c.pi0_grid = {0.5, 1.0};
  c.n_grid = {2, 8};
  c.replicates = 20;
  c.estimators = {nfdr::EstimatorKind::mle, nfdr::EstimatorKind::corrected_median};
  return c;
}

}  // namespace

TEST_CASE("datasets are reproducible and consistent", "[simkit]") {
  const auto a = generate_dataset(0.7, 500, 2.0, 1234);
  const auto b = generate_dataset(0.7, 500, 2.0, 1234);
  CHECK(a.p_values == b.p_values);
  CHECK(a.truth_labels == b.truth_labels);
  CHECK(a.seed == 1234);
  REQUIRE(a.p_values.size() == 500);
  for (std::size_t i = 0; i < 500; ++i) CHECK(a.p_values[i] == dist::chi2_1df_sf(a.statistics[i]));
  const auto c = generate_dataset(0.7, 500, 2.0, 1235);
  CHECK(a.p_values != c.p_values);
  CHECK_THROWS_AS(generate_dataset(1.2, 5, 2.0, 1), std::domain_error);
  CHECK_THROWS_AS(generate_dataset(0.5, 5, -1.0, 1), std::domain_error);
}

TEST_CASE("null-only datasets have uniform p-values", "[simkit]") {
  std::vector<double> pooled;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto ds = generate_dataset(1.0, 10000, 2.0, s);
    CHECK(std::all_of(ds.truth_labels.begin(), ds.truth_labels.end(), [](auto a) { return a == 0; }));
    pooled.insert(pooled.end(), ds.p_values.begin(), ds.p_values.end());
  }
  CHECK(oracle::ks_uniform(pooled) < oracle::kKs999At1e5);
  // δ = 0 makes the alternative a null as well.
  const auto flat = generate_dataset(0.0, 100000, 0.0, 99);
  CHECK(oracle::ks_uniform(flat.p_values) < oracle::kKs999At1e5);
}

TEST_CASE("alternative share follows pi0", "[simkit]") {
  const auto ds = generate_dataset(0.75, 100000, 2.0, 5);
  const double share = std::count(ds.truth_labels.begin(), ds.truth_labels.end(), 1) / 100000.0;
  CHECK_THAT(share, WithinAbs(0.25, 0.005));
}

TEST_CASE("true LFDR", "[simkit]") {
  CHECK(true_lfdr(0.3, 1.0, 2.0) == 1.0);
  CHECK(true_lfdr(0.3, 0.4, 0.0) == 0.4);
  CHECK(true_lfdr(0.0, 0.5, 2.0) == 0.0);
  CHECK_THROWS_AS(true_lfdr(1.5, 0.5, 2.0), std::domain_error);
  // Direct density ratio at t = 3.84 (p = 0.05).
  const double t = 3.841458820694124;
  const double f0 = dist::noncentral_chi2_1df_pdf(t, 0.0);
  const double f1 = dist::noncentral_chi2_1df_pdf(t, 2.0);
  CHECK_THAT(true_lfdr(0.05, 0.9, 2.0), WithinAbs(0.9 * f0 / (0.9 * f0 + 0.1 * f1), 1e-9));
  double prev = -1.0;
  for (int i = 1; i <= 100; ++i) {
    const double v = true_lfdr(i / 100.0, 0.9, 2.0);
    CHECK(v >= prev);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("Pearson skewness", "[simkit]") {
  CHECK_THAT(pearson_skewness(std::vector<double>{-1.0, 0.0, 1.0}), WithinAbs(0.0, 1e-15));
  CHECK_THAT(pearson_skewness(std::vector<double>{0.0, 0.0, 3.0}), WithinAbs(std::sqrt(3.0), 1e-12));
  CHECK_THROWS_AS(pearson_skewness(std::vector<double>{1.0, 1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(pearson_skewness(std::vector<double>{1.0}), std::domain_error);
}

TEST_CASE("conditional skewness of the true LFDR below a threshold", "[simkit]") {
  // φ is increasing in p and most of the mass below α sits near α, so the
  // conditional distribution has a long lower tail. Reference value from an
  // independent 2·10⁶-draw scipy simulation: -1.033.
  const auto ds = generate_dataset(0.9, 200000, 2.0, 77);
  std::vector<double> phi;
  for (double p : ds.p_values)
    if (p <= 0.1) phi.push_back(true_lfdr(p, 0.9, 2.0));
  REQUIRE(phi.size() > 1000);
  CHECK_THAT(pearson_skewness(phi), WithinAbs(-1.033, 0.08));
}

TEST_CASE("exact small-N coverage", "[simkit]") {
  // N = 1, Π = 0.8: the MLE reaches α/Π only when x = 0.
  CHECK_THAT(exact_small_n_coverage(1, 0.05, 0.8, nfdr::EstimatorKind::mle), WithinAbs(0.2, 1e-12));
  CHECK_THAT(exact_small_n_coverage(1, 0.05, 0.8, nfdr::EstimatorKind::corrected_median), WithinAbs(1.0, 1e-12));
  CHECK_THAT(exact_small_n_coverage(3, 0.05, 1.0, nfdr::EstimatorKind::mle), WithinAbs(1.0, 1e-12));
  CHECK_THROWS_AS(exact_small_n_coverage(6, 0.05, 0.5, nfdr::EstimatorKind::mle), std::domain_error);
  CHECK_THROWS_AS(exact_small_n_coverage(2, 0.5, 0.2, nfdr::EstimatorKind::mle), std::domain_error);

  bool mle_below_half = false;
  for (std::int64_t n = 1; n <= 3; ++n)
    for (double alpha : {0.01, 0.05, 0.1})
      for (int i = 1; i <= 100; ++i) {
        const double pi = i / 100.0;
        if (pi < alpha) continue;
        CHECK(exact_small_n_coverage(n, alpha, pi, nfdr::EstimatorKind::corrected_median) >= 0.5 - 1e-12);
        mle_below_half = mle_below_half || exact_small_n_coverage(n, alpha, pi, nfdr::EstimatorKind::mle) < 0.5;
      }
  CHECK(mle_below_half);
}

TEST_CASE("replicate outcomes line up with the dataset", "[simkit]") {
  const auto config = small_config();
  const auto out = simulate_replicate(config, 0.5, 8, 42);
  REQUIRE(out.truth.size() == 8);
  REQUIRE(out.estimates.size() == 2);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(out.truth[i] == true_lfdr(out.dataset.p_values[i], 0.5, config.delta));
    CHECK(out.estimates[1][i] >= out.estimates[0][i] - 1e-12);
  }
}

TEST_CASE("grid metrics when every null is true", "[simkit]") {
  auto config = small_config();
  config.pi0_grid = {1.0};
  const auto rows = run_grid(config);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.bias <= 0.0);
    // Truth is 1, so an estimate is conservative exactly when it equals 1.
    std::size_t ones = 0;
    std::size_t total = 0;
    const auto i_n = static_cast<std::size_t>(std::find(config.n_grid.begin(), config.n_grid.end(), row.n) -
                                              config.n_grid.begin());
    const auto e = static_cast<std::size_t>(
        std::find(config.estimators.begin(), config.estimators.end(), row.estimator) - config.estimators.begin());
    for (std::size_t r = 0; r < config.replicates; ++r) {
      const auto out = simulate_replicate(config, 1.0, row.n, replicate_seed(config.seed, 0, i_n, r));
      for (double v : out.estimates[e]) {
        ones += v == 1.0;
        ++total;
      }
    }
    CHECK(row.estimate_count == total);
    CHECK_THAT(row.conservatism_proportion, WithinAbs(static_cast<double>(ones) / total, 1e-15));
  }
}

TEST_CASE("grid metrics with delta = 0", "[simkit]") {
  auto config = small_config();
  config.delta = 0.0;
  config.pi0_grid = {0.6};
  for (const auto& row : run_grid(config)) {
    CHECK(row.rmse >= 0.0);
    CHECK(row.rmse <= 1.0);
  }
  const auto out = simulate_replicate(config, 0.6, 8, 3);
  for (double t : out.truth) CHECK(t == 0.6);
}

TEST_CASE("grid output does not depend on the thread count", "[simkit]") {
  auto config = small_config();
  config.threads = 1;
  const auto a = run_grid(config);
  config.threads = 4;
  const auto b = run_grid(config);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rmse == b[i].rmse);
    CHECK(a[i].bias == b[i].bias);
    CHECK(a[i].conservatism_proportion == b[i].conservatism_proportion);
  }
}

TEST_CASE("replicate-mean pooling", "[simkit]") {
  auto config = small_config();
  config.pooling = Pooling::replicate_mean;
  const auto rows = run_grid(config);
  config.pooling = Pooling::pooled;
  const auto pooled = run_grid(config);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // Equal replicate sizes make the bias and conservatism means coincide.
    CHECK_THAT(rows[i].bias, WithinAbs(pooled[i].bias, 1e-12));
    CHECK_THAT(rows[i].conservatism_proportion, WithinAbs(pooled[i].conservatism_proportion, 1e-12));
    CHECK(rows[i].rmse <= pooled[i].rmse + 1e-12);  // mean of roots ≤ root of mean
  }
}

TEST_CASE("invalid configurations are rejected", "[simkit]") {
  auto config = small_config();
  config.replicates = 0;
  CHECK_THROWS_AS(run_grid(config), std::invalid_argument);
  config = small_config();
  config.pi0_grid = {1.5};
  CHECK_THROWS_AS(run_grid(config), std::invalid_argument);
  config = small_config();
  config.estimators.clear();
  CHECK_THROWS_AS(run_grid(config), std::invalid_argument);
}

TEST_CASE("corrected LFDR error shrinks as nulls dominate", "[simkit]") {
  SimulationConfig config;
  config.pi0_grid = {0.5, 0.9};
  config.n_grid = {32};
  config.replicates = 100;
  config.estimators = {nfdr::EstimatorKind::corrected_median};
  const auto rows = run_grid(config);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].rmse <= rows[0].rmse);
}

TEST_CASE("corrected LFDR is conservative for large N", "[simkit]") {
  SimulationConfig config;
  config.estimators = {nfdr::EstimatorKind::corrected_median};
  config.replicates = 1;
  for (double pi0 : {0.5, 0.9}) {
    std::vector<double> share;
    for (std::size_t n : {100, 1000, 10000}) {
      const auto out = simulate_replicate(config, pi0, n, numerics::derive_seed(config.seed, {n}));
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i) hits += out.estimates[0][i] >= out.truth[i];
      share.push_back(static_cast<double>(hits) / static_cast<double>(n));
    }
    INFO("pi0 = " << pi0 << ": " << share[0] << " " << share[1] << " " << share[2]);
    CHECK(share[2] > 0.95);
    CHECK(share[2] >= share[0]);
  }
}

TEST_CASE("null-only bias at N = 2 matches its closed form", "[simkit]") {
  // π₀ = 1, N = 2: rank 1 gets min(c·p_(2), 1) with p_(2) the larger of two
  // uniforms, rank 2 gets 1. MLE: c = 1, E = 2/3, bias -1/6. Corrected: c = √2
  // (median of π² is 2^{-1/2}), E = 1/3 + 1/2, bias -1/12.
  SimulationConfig config;
  config.pi0_grid = {1.0};
  config.n_grid = {2};
  config.replicates = 20000;
  config.estimators = {nfdr::EstimatorKind::mle, nfdr::EstimatorKind::corrected_median};
  const auto rows = run_grid(config);
  CHECK_THAT(rows[0].bias, WithinAbs(-1.0 / 6.0, 0.005));
  CHECK_THAT(rows[1].bias, WithinAbs(-1.0 / 12.0, 0.005));
}
