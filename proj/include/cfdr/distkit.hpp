#pragma once

// Special functions and distributions: binomial pmf/tails through the
// regularized incomplete beta, standard normal, central and noncentral
// chi-square with one degree of freedom, and Student's t.

#include <cfdr/numerics.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cfdr::dist {

struct BinomialParams {
  std::int64_t trials = 1;
  double success_prob = 0.0;

  void validate() const {
    if (trials < 1) throw std::domain_error("binomial: trials must be >= 1");
    if (!(success_prob >= 0.0 && success_prob <= 1.0))
      throw std::domain_error("binomial: success probability outside [0,1]");
  }
};

struct Chi2MixtureParams {
  double pi0 = 1.0;
  double delta = 0.0;

  void validate() const {
    if (!(pi0 >= 0.0 && pi0 <= 1.0)) throw std::domain_error("mixture: pi0 outside [0,1]");
    if (!(delta >= 0.0)) throw std::domain_error("mixture: delta must be >= 0");
  }
};

namespace detail {

// Modified Lentz evaluation of the incomplete beta continued fraction.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-14;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b), a, b > 0. The continued fraction is
/// evaluated directly below the symmetry point (a+1)/(a+b+2) and through
/// I_x(a,b) = 1 - I_{1-x}(b,a) above it.
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw std::domain_error("incomplete beta: shape parameters must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("incomplete beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = numerics::log_gamma(a + b) - numerics::log_gamma(a) -
                           numerics::log_gamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Upper counterpart 1 - I_x(a, b), evaluated without cancellation on the
/// side where the continued fraction is applied directly.
inline double incomplete_beta_complement(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw std::domain_error("incomplete beta: shape parameters must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("incomplete beta: x outside [0,1]");
  if (x == 0.0) return 1.0;
  if (x == 1.0) return 0.0;
  const double log_front = numerics::log_gamma(a + b) - numerics::log_gamma(a) -
                           numerics::log_gamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return 1.0 - front * detail::beta_continued_fraction(a, b, x) / a;
  return front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace detail {

inline void check_count(const BinomialParams& params, std::int64_t x) {
  params.validate();
  if (x < 0 || x > params.trials)
    throw std::domain_error("binomial: count " + std::to_string(x) + " outside [0, " +
                            std::to_string(params.trials) + "]");
}

}  // namespace detail

/// Pr(X = x) for X ~ Binomial(N, Π), evaluated in log space.
inline double binomial_pmf(const BinomialParams& params, std::int64_t x) {
  detail::check_count(params, x);
  const auto n = params.trials;
  const double p = params.success_prob;
  if (p == 0.0) return x == 0 ? 1.0 : 0.0;
  if (p == 1.0) return x == n ? 1.0 : 0.0;
  const double log_pmf = numerics::log_choose(static_cast<double>(n), static_cast<double>(x)) +
                         static_cast<double>(x) * std::log(p) +
                         static_cast<double>(n - x) * std::log1p(-p);
  return std::exp(log_pmf);
}

/// Strict upper tail Pr(X > x). Uses Pr(X > x) = I_Π(x + 1, N - x).
inline double binomial_sf(const BinomialParams& params, std::int64_t x) {
  detail::check_count(params, x);
  const auto n = params.trials;
  if (x == n) return 0.0;
  const double p = params.success_prob;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  return incomplete_beta(static_cast<double>(x + 1), static_cast<double>(n - x), p);
}

/// Pr(X <= x).
inline double binomial_cdf(const BinomialParams& params, std::int64_t x) {
  detail::check_count(params, x);
  const auto n = params.trials;
  if (x == n) return 1.0;
  const double p = params.success_prob;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  return incomplete_beta_complement(static_cast<double>(x + 1), static_cast<double>(n - x), p);
}

inline double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Pr(χ²₁ > t) = 2(1 - Φ(√t)); the p-value map for chi-square statistics.
inline double chi2_1df_sf(double t) {
  if (!(t >= 0.0)) throw std::domain_error("chi2_1df_sf: statistic must be >= 0");
  return std::erfc(std::sqrt(t) / std::numbers::sqrt2);
}

/// Inverse of chi2_1df_sf: the statistic t whose upper-tail probability is p.
/// p = 0 maps to +infinity.
inline double chi2_1df_isf(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("chi2_1df_isf: p outside [0,1]");
  if (p == 1.0) return 0.0;
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  // erfc(z/√2) is decreasing in z; erfc(38/√2) underflows below DBL_MIN.
  constexpr double kZMax = 38.5;
  if (std::erfc(kZMax / std::numbers::sqrt2) >= p) return kZMax * kZMax;
  const double z = numerics::bisect_increasing(
      [](double zz) { return -std::erfc(zz / std::numbers::sqrt2); }, -p, 0.0, kZMax,
      {.abs_tol = 0.0, .max_iter = 200});
  return z * z;
}

/// Density of χ²₁ with noncentrality δ at t > 0.
inline double noncentral_chi2_1df_pdf(double t, double delta) {
  if (!(t > 0.0)) throw std::domain_error("noncentral_chi2_1df_pdf: t must be > 0");
  if (!(delta >= 0.0)) throw std::domain_error("noncentral_chi2_1df_pdf: delta must be >= 0");
  const double root_t = std::sqrt(t);
  const double root_delta = std::sqrt(delta);
  return (std_normal_pdf(root_t - root_delta) + std_normal_pdf(root_t + root_delta)) / (2.0 * root_t);
}

/// ln f_δ(t) - ln f_0(t) = -δ/2 + ln cosh(√(tδ)), stable for large t.
inline double noncentral_chi2_1df_log_likelihood_ratio(double t, double delta) {
  if (!(t >= 0.0)) throw std::domain_error("likelihood ratio: t must be >= 0");
  if (!(delta >= 0.0)) throw std::domain_error("likelihood ratio: delta must be >= 0");
  const double u = std::sqrt(t * delta);
  // ln cosh(u) = u + ln(1 + e^{-2u}) - ln 2
  return -0.5 * delta + u + std::log1p(std::exp(-2.0 * u)) - std::numbers::ln2;
}

/// Pr(T > t) for Student's t with df degrees of freedom.
inline double student_t_sf(double t, std::int64_t df) {
  if (df < 1) throw std::domain_error("student_t_sf: df must be >= 1");
  if (std::isnan(t)) throw std::domain_error("student_t_sf: t is NaN");
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double nu = static_cast<double>(df);
  const double x = nu / (nu + t * t);
  const double half_tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x);
  return t > 0.0 ? half_tail : 1.0 - half_tail;
}

}  // namespace cfdr::dist
