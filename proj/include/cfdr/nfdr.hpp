#pragma once

// Estimators of the nonlocal false discovery rate Φ(𝒯) = π₀Π₀(𝒯)/Π(𝒯) from
// the number x of the N statistics that fall in the rejection region, with
// π₀ replaced by its upper bound 1 and Π₀(𝒯) given as the test-wise level α.

#include <cfdr/confdist.hpp>
#include <cfdr/distkit.hpp>
#include <cfdr/numerics.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace cfdr::nfdr {

enum class EstimatorKind { mle, corrected_median, posterior_mean };

inline std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::mle: return "mle";
    case EstimatorKind::corrected_median: return "corrected";
    case EstimatorKind::posterior_mean: return "mean";
  }
  return "unknown";
}

/// Accepts the CLI spellings plus the long names.
inline EstimatorKind parse_estimator_kind(std::string_view name) {
  if (name == "mle") return EstimatorKind::mle;
  if (name == "corrected" || name == "corrected_median" || name == "median")
    return EstimatorKind::corrected_median;
  if (name == "mean" || name == "posterior_mean") return EstimatorKind::posterior_mean;
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
}

struct NfdrEstimate {
  double value = 1.0;
  EstimatorKind kind = EstimatorKind::mle;
  double alpha = 0.0;            ///< Π₀(𝒯), the test-wise level
  std::int64_t successes = 0;    ///< x = N₊(𝒯)
  std::int64_t trials = 1;       ///< N
  double weight = 0.0;           ///< C; unused by the MLE
  bool capped = false;           ///< the ∧1 bound was active
  std::optional<double> std_error;  ///< Monte Carlo standard error, when sampled
};

struct MixtureTruth {
  double pi0 = 1.0;
  double null_prob = 0.0;      ///< Π₀(𝒯)
  double marginal_prob = 0.0;  ///< Π(𝒯)

  void validate() const {
    for (double v : {pi0, null_prob, marginal_prob})
      if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("mixture truth: probability outside [0,1]");
    if (marginal_prob < pi0 * null_prob)
      throw std::domain_error("mixture truth: marginal probability below pi0 * null probability");
  }

  /// Π₁(𝒯) recovered from Π = π₀Π₀ + (1 - π₀)Π₁; undefined when π₀ = 1.
  [[nodiscard]] std::optional<double> alternative_prob() const {
    if (pi0 >= 1.0) return std::nullopt;
    return (marginal_prob - pi0 * null_prob) / (1.0 - pi0);
  }
};

inline double true_nfdr(const MixtureTruth& truth) {
  truth.validate();
  if (truth.marginal_prob == 0.0) throw std::domain_error("true_nfdr: marginal probability is zero");
  return truth.pi0 * truth.null_prob / truth.marginal_prob;
}

namespace detail {

inline void check_inputs(double alpha, std::int64_t x, std::int64_t n) {
  if (n < 1) throw std::domain_error("nfdr: N must be >= 1");
  if (x < 0 || x > n) throw std::domain_error("nfdr: x outside [0, N]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("nfdr: alpha outside [0,1]");
}

inline NfdrEstimate unit_estimate(EstimatorKind kind, double alpha, std::int64_t x, std::int64_t n,
                                  double weight) {
  return {.value = 1.0, .kind = kind, .alpha = alpha, .successes = x, .trials = n,
          .weight = weight, .capped = true, .std_error = std::nullopt};
}

// Binomial(n, π) pmf allowing n = 0.
inline double pmf_n0(std::int64_t n, std::int64_t k, double pi) {
  if (k < 0 || k > n) return 0.0;
  if (n == 0) return 1.0;
  return dist::binomial_pmf({n, pi}, k);
}

}  // namespace detail

/// Φ̂ = α / (x/N) ∧ 1. No discoveries (x = 0) gives 1.
inline NfdrEstimate mle_nfdr(double alpha, std::int64_t x, std::int64_t n) {
  detail::check_inputs(alpha, x, n);
  if (x == 0) return detail::unit_estimate(EstimatorKind::mle, alpha, x, n, 0.0);
  const double ratio = alpha * static_cast<double>(n) / static_cast<double>(x);
  return {.value = std::min(ratio, 1.0), .kind = EstimatorKind::mle, .alpha = alpha,
          .successes = x, .trials = n, .weight = 0.0, .capped = ratio > 1.0, .std_error = std::nullopt};
}

/// Largest level α at which mle_nfdr(α, x, N) ≤ q, for q < 1. Rejection
/// rules compare p-values against this instead of dividing, so boundary
/// p-values such as q/N are classified exactly.
inline double mle_level_bound(double q, std::int64_t x, std::int64_t n) {
  return q * static_cast<double>(x) / static_cast<double>(n);
}

/// Φ̃_C = α / S_C⁻¹(1/2; x) ∧ 1. When the median of the confidence
/// distribution is 0 or not attained (x = 0 with C ≥ 1/2) the value is 1.
inline NfdrEstimate corrected_nfdr(double alpha, std::int64_t x, std::int64_t n, double weight = 1.0) {
  detail::check_inputs(alpha, x, n);
  const confdist::ConfidenceDistribution cd{n, x, weight};
  cd.validate();
  if (x == 0) return detail::unit_estimate(EstimatorKind::corrected_median, alpha, x, n, weight);
  const auto range = confdist::attainable_range(cd);
  if (!(0.5 >= range.low && 0.5 <= range.high))
    return detail::unit_estimate(EstimatorKind::corrected_median, alpha, x, n, weight);
  const double median = confdist::inverse_significance(cd, 0.5);
  if (median <= 0.0) return detail::unit_estimate(EstimatorKind::corrected_median, alpha, x, n, weight);
  const double ratio = alpha / median;
  return {.value = std::min(ratio, 1.0), .kind = EstimatorKind::corrected_median, .alpha = alpha,
          .successes = x, .trials = n, .weight = weight, .capped = ratio > 1.0,
          .std_error = std::nullopt};
}

/// Where the ∧1 bound is applied in the confidence-posterior mean.
enum class CapPlacement {
  per_draw,   ///< E[min(α/Π′, 1)]
  final_mean  ///< min(E[α/Π′], 1)
};

struct MonteCarlo {
  std::size_t draws = 100;
  std::uint64_t seed = 0;
};

struct Quadrature {
  double tolerance = 1e-10;
};

using MeanMethod = std::variant<MonteCarlo, Quadrature>;

namespace detail {

// Density of Π′ under S_C(·; x):
//   (1-C)·N·b(x; N-1, π)·1{x<N} + C·N·b(x-1; N-1, π)·1{x≥1}.
inline double significance_density(const confdist::ConfidenceDistribution& cd, double pi) {
  const auto n = cd.trials;
  const auto x = cd.successes;
  double d = 0.0;
  if (x < n && cd.weight < 1.0) d += (1.0 - cd.weight) * static_cast<double>(n) * pmf_n0(n - 1, x, pi);
  if (x >= 1 && cd.weight > 0.0) d += cd.weight * static_cast<double>(n) * pmf_n0(n - 1, x - 1, pi);
  return d;
}

// ∫_a^b g(π)·s(π) dπ, split around the bulk of the density so the adaptive
// rule sees the peak even when N is large.
template <typename G>
double integrate_against_density(const confdist::ConfidenceDistribution& cd, G&& g, double a, double b,
                                 double tol) {
  if (!(b > a)) return 0.0;
  const double n = static_cast<double>(cd.trials);
  const double centre = std::clamp(static_cast<double>(cd.successes) / n, 0.0, 1.0);
  const double spread = std::sqrt(std::max(centre * (1.0 - centre), 1.0 / n) / n);
  std::vector<double> cuts{a};
  for (double k : {-12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0}) {
    const double c = centre + k * spread;
    if (c > cuts.back() && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  auto integrand = [&](double pi) { return g(pi) * significance_density(cd, pi); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, cuts[i],
                                                                           cuts[i + 1], 15, tol);
  return total;
}

inline NfdrEstimate mean_by_quadrature(double alpha, const confdist::ConfidenceDistribution& cd,
                                       const Quadrature& q, CapPlacement cap) {
  NfdrEstimate est{.value = 1.0, .kind = EstimatorKind::posterior_mean, .alpha = alpha,
                   .successes = cd.successes, .trials = cd.trials, .weight = cd.weight,
                   .capped = false, .std_error = std::nullopt};
  const auto range = confdist::attainable_range(cd);
  const double atom_at_one = 1.0 - range.high;
  if (cap == CapPlacement::per_draw) {
    if (alpha >= 1.0) return est;
    // Π′ ≤ α (including the atom at 0) contributes 1; the atom at 1 contributes α.
    const double below = confdist::significance(cd, alpha);
    const double above = integrate_against_density(cd, [alpha](double pi) { return alpha / pi; }, alpha, 1.0,
                                                   q.tolerance);
    est.value = std::clamp(below + alpha * atom_at_one + above, 0.0, 1.0);
    est.capped = below > 0.0;
    return est;
  }
  // Uncapped integrand α/Π′ diverges when Π′ has an atom or positive density at 0.
  const bool divergent = alpha > 0.0 && (range.low > 0.0 || (cd.successes <= 1 && cd.weight > 0.0));
  if (divergent) {
    est.capped = true;
    return est;
  }
  const double mean = alpha * atom_at_one +
                      integrate_against_density(cd, [alpha](double pi) { return alpha / pi; }, 0.0, 1.0,
                                                q.tolerance);
  est.value = std::min(mean, 1.0);
  est.capped = mean > 1.0;
  return est;
}

inline NfdrEstimate mean_by_monte_carlo(double alpha, const confdist::ConfidenceDistribution& cd,
                                        const MonteCarlo& mc, CapPlacement cap) {
  if (mc.draws < 1) throw std::domain_error("mean_nfdr: Monte Carlo draws must be >= 1");
  const auto draws = confdist::sample_parameter(cd, mc.draws, mc.seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double pi : draws) {
    double v;
    if (cap == CapPlacement::per_draw)
      v = (pi <= 0.0) ? 1.0 : std::min(alpha / pi, 1.0);
    else
      v = (pi <= 0.0) ? (alpha > 0.0 ? HUGE_VAL : 0.0) : alpha / pi;
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(draws.size());
  const double mean = sum / n;
  std::optional<double> se;
  if (draws.size() > 1 && std::isfinite(mean)) {
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    se = std::sqrt(var / n);
  }
  return {.value = std::min(mean, 1.0), .kind = EstimatorKind::posterior_mean, .alpha = alpha,
          .successes = cd.successes, .trials = cd.trials, .weight = cd.weight,
          .capped = cap == CapPlacement::per_draw ? mean >= 1.0 : mean > 1.0, .std_error = se};
}

}  // namespace detail

/// Φ̄_C: the mean of α/Π′ ∧ 1 with Π′ distributed as S_C(·; x).
inline NfdrEstimate mean_nfdr(double alpha, std::int64_t x, std::int64_t n, double weight = 0.5,
                              MeanMethod method = MonteCarlo{},
                              CapPlacement cap = CapPlacement::per_draw) {
  detail::check_inputs(alpha, x, n);
  const confdist::ConfidenceDistribution cd{n, x, weight};
  cd.validate();
  if (x == 0) return detail::unit_estimate(EstimatorKind::posterior_mean, alpha, x, n, weight);
  return std::visit(
      [&](const auto& m) -> NfdrEstimate {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MonteCarlo>)
          return detail::mean_by_monte_carlo(alpha, cd, m, cap);
        else
          return detail::mean_by_quadrature(alpha, cd, m, cap);
      },
      method);
}

/// Options shared by callers that dispatch on the estimator kind.
struct EstimatorOptions {
  std::optional<double> weight;  ///< defaults: 1 for the median, 1/2 for the mean
  MeanMethod mean_method = MonteCarlo{};
  CapPlacement cap = CapPlacement::per_draw;

  [[nodiscard]] double weight_for(EstimatorKind kind) const {
    if (weight) return *weight;
    return kind == EstimatorKind::posterior_mean ? 0.5 : 1.0;
  }
};

inline NfdrEstimate estimate(EstimatorKind kind, double alpha, std::int64_t x, std::int64_t n,
                             const EstimatorOptions& opts = {}) {
  switch (kind) {
    case EstimatorKind::mle: return mle_nfdr(alpha, x, n);
    case EstimatorKind::corrected_median: return corrected_nfdr(alpha, x, n, opts.weight_for(kind));
    case EstimatorKind::posterior_mean:
      return mean_nfdr(alpha, x, n, opts.weight_for(kind), opts.mean_method, opts.cap);
  }
  throw std::logic_error("unreachable estimator kind");
}

}  // namespace cfdr::nfdr
