#pragma once

// Binomial confidence distributions. For a realization x of X ~ Binomial(N, Π)
// and a weight C in [0,1], the significance function
//
//   S_C(π; x) = Pr(X > x; π) + C·Pr(X = x; π)
//
// is nondecreasing in π and serves as the distribution function of a random
// parameter Π′. Its inverse gives one-sided binomial confidence bounds and
// inverse-CDF draws of Π′.

#include <cfdr/distkit.hpp>
#include <cfdr/numerics.hpp>

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfdr::confdist {

struct ConfidenceDistribution {
  std::int64_t trials = 1;
  std::int64_t successes = 0;
  double weight = 1.0;

  void validate() const {
    if (trials < 1) throw std::domain_error("confidence distribution: trials must be >= 1");
    if (successes < 0 || successes > trials)
      throw std::domain_error("confidence distribution: successes outside [0, trials]");
    if (!(weight >= 0.0 && weight <= 1.0))
      throw std::domain_error("confidence distribution: weight outside [0,1]");
  }
};

inline double significance(const ConfidenceDistribution& cd, double pi) {
  cd.validate();
  if (!(pi >= 0.0 && pi <= 1.0)) throw std::domain_error("significance: pi outside [0,1]");
  const dist::BinomialParams params{cd.trials, pi};
  const double upper = dist::binomial_sf(params, cd.successes);
  if (cd.weight == 0.0) return upper;
  return std::min(1.0, upper + cd.weight * dist::binomial_pmf(params, cd.successes));
}

struct AttainableRange {
  double low;   ///< S_C(0; x)
  double high;  ///< S_C(1; x)
};

/// Closed form of [S_C(0; x), S_C(1; x)].
inline AttainableRange attainable_range(const ConfidenceDistribution& cd) {
  cd.validate();
  const double low = cd.successes == 0 ? cd.weight : 0.0;
  const double high = cd.successes < cd.trials ? 1.0 : cd.weight;
  return {low, high};
}

/// Thrown when s lies outside the attainable range of S_C(·; x).
class UnattainableLevel : public std::range_error {
 public:
  using std::range_error::range_error;
};

inline double inverse_significance(const ConfidenceDistribution& cd, double s) {
  const auto range = attainable_range(cd);
  if (!(s >= range.low && s <= range.high))
    throw UnattainableLevel("inverse_significance: level " + std::to_string(s) +
                            " outside attainable range [" + std::to_string(range.low) + ", " +
                            std::to_string(range.high) + "]");
  if (s == range.low) return 0.0;
  if (s == range.high) return 1.0;
  return numerics::bisect_increasing([&cd](double pi) { return significance(cd, pi); }, s, 0.0, 1.0,
                                     {.abs_tol = 1e-15, .max_iter = 200});
}

enum class Side { lower_bounded, upper_bounded };

struct Interval {
  double lower;
  double upper;
};

/// One-sided (1 - alpha) binomial confidence interval: [0, S₀⁻¹(1-α; x)] or
/// [S₁⁻¹(α; x), 1]. The weight of `cd` is ignored; each side fixes its own.
inline Interval one_sided_interval(const ConfidenceDistribution& cd, double alpha, Side side) {
  cd.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("one_sided_interval: alpha outside (0,1)");
  if (side == Side::upper_bounded) {
    const ConfidenceDistribution strict{cd.trials, cd.successes, 0.0};
    if (cd.successes == cd.trials) return {0.0, 1.0};
    return {0.0, inverse_significance(strict, 1.0 - alpha)};
  }
  const ConfidenceDistribution inclusive{cd.trials, cd.successes, 1.0};
  if (cd.successes == 0) return {0.0, 1.0};
  return {inverse_significance(inclusive, alpha), 1.0};
}

/// Maps a uniform variate to Π′ = S_C⁻¹(u; x). Variates outside the
/// attainable range land on the atoms at 0 and 1.
inline double quantile_or_atom(const ConfidenceDistribution& cd, const AttainableRange& range, double u) {
  if (u <= range.low) return 0.0;
  if (u >= range.high) return 1.0;
  return inverse_significance(cd, u);
}

/// Draws n_draws values of Π′ by inverse-CDF sampling from a generator seeded
/// with `seed` and owned by this call.
inline std::vector<double> sample_parameter(const ConfidenceDistribution& cd, std::size_t n_draws,
                                            std::uint64_t seed) {
  if (n_draws < 1) throw std::domain_error("sample_parameter: n_draws must be >= 1");
  const auto range = attainable_range(cd);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> draws;
  draws.reserve(n_draws);
  for (std::size_t i = 0; i < n_draws; ++i) draws.push_back(quantile_or_atom(cd, range, unif(rng)));
  return draws;
}

}  // namespace cfdr::confdist
