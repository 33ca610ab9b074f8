#pragma once

// Reference computations for the test suite, written against Boost.Math or
// by brute force so they share no code path with the library.

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

/// Binomial pmf by direct product of ratios in long double.
inline long double binomial_pmf(std::int64_t n, std::int64_t k, long double p) {
  if (k < 0 || k > n) return 0.0L;
  if (p == 0.0L) return k == 0 ? 1.0L : 0.0L;
  if (p == 1.0L) return k == n ? 1.0L : 0.0L;
  long double logc = std::lgamma(static_cast<long double>(n + 1)) - std::lgamma(static_cast<long double>(k + 1)) -
                     std::lgamma(static_cast<long double>(n - k + 1));
  return std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// Pr(X > x) + C·Pr(X = x) by summing the pmf.
inline double significance(std::int64_t n, std::int64_t x, double c, double p) {
  long double above = 0.0L;
  for (std::int64_t k = x + 1; k <= n; ++k) above += binomial_pmf(n, k, p);
  return static_cast<double>(above + c * binomial_pmf(n, x, p));
}

/// S_C(π; x) = (1-C)·I_π(x+1, N-x) + C·I_π(x, N-x+1): a
/// mixture of two Beta laws. Returns the mixture CDF.
inline double beta_mixture_cdf(std::int64_t n, std::int64_t x, double c, double p) {
  double v = 0.0;
  if (x < n) v += (1.0 - c) * boost::math::ibeta(static_cast<double>(x + 1), static_cast<double>(n - x), p);
  v += x > 0 ? c * boost::math::ibeta(static_cast<double>(x), static_cast<double>(n - x + 1), p) : c;
  return v;
}

/// E[min(α/Π', 1)] for Π' drawn from the Beta mixture above (0 < x < N),
/// integrating each component density against the capped ratio.
inline double capped_mean(std::int64_t n, std::int64_t x, double c, double alpha) {
  using boost::math::quadrature::gauss_kronrod;
  auto component = [&](double a, double b) {
    boost::math::beta_distribution<double> beta(a, b);
    const double below = boost::math::cdf(beta, alpha);
    auto f = [&](double u) { return alpha / u * boost::math::pdf(beta, u); };
    double err = 0.0;
    const double above = gauss_kronrod<double, 61>::integrate(f, alpha, 1.0, 15, 1e-13, &err);
    return below + above;
  };
  double v = 0.0;
  if (x < n) v += (1.0 - c) * component(static_cast<double>(x + 1), static_cast<double>(n - x));
  if (x > 0) v += c * component(static_cast<double>(x), static_cast<double>(n - x + 1));
  return v;
}

/// Clopper-Pearson style one-sided bounds: the C = 0 upper bound and the
/// C = 1 lower bound are Beta quantiles.
inline double upper_bound_c0(std::int64_t n, std::int64_t x, double alpha) {
  if (x == n) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(x + 1), static_cast<double>(n - x), 1.0 - alpha);
}
inline double lower_bound_c1(std::int64_t n, std::int64_t x, double alpha) {
  if (x == 0) return 0.0;
  return boost::math::ibeta_inv(static_cast<double>(x), static_cast<double>(n - x + 1), alpha);
}

/// Textbook step-up: sort ascending, largest k with p_(k) ≤ kq/N, reject
/// the k smallest. Returns the number of rejections.
inline std::size_t bh_count(std::vector<double> p, double q) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] <= static_cast<double>(i + 1) * q / n) k = i + 1;
  return k;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double ks_uniform(std::vector<double> sample) {
  return ks_statistic(std::move(sample), [](double u) { return std::clamp(u, 0.0, 1.0); });
}

/// Two-sided 0.999 critical values of the one-sample KS statistic
/// (frozen from scipy.stats.kstwo.ppf(0.999, n)).
constexpr double kKs999At1e5 = 0.006163;
constexpr double kKs999At1000 = 0.06146;

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace oracle
