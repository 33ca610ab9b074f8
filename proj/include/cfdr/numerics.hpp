#pragma once

// Small numerical kernels shared by the estimators: monotone root bracketing,
// log-gamma without global state, and counter-based seed derivation.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace cfdr::numerics {

/// ln Γ(x) for x > 0. glibc's std::lgamma writes the global `signgam`,
/// so the reentrant variant is used where it exists.
inline double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline double log_choose(double n, double k) {
  return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

struct BisectionOptions {
  double abs_tol = 1e-15;
  int max_iter = 200;
};

/// Solves f(x) = target on [lo, hi] for nondecreasing f. The bracket must
/// satisfy f(lo) <= target <= f(hi); callers check attainability.
template <typename F>
double bisect_increasing(F&& f, double target, double lo, double hi,
                         BisectionOptions opts = {}) {
  for (int it = 0; it < opts.max_iter && hi - lo > opts.abs_tol; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double v = f(mid);
    if (v == target) return mid;
    if (v < target)
      lo = mid;
    else
      hi = mid;
  }
  return lo + 0.5 * (hi - lo);
}

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a base seed and a coordinate path
/// (e.g. grid index, replicate index). Depends only on its arguments, so
/// results do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(base);
  for (auto p : path) s = mix64(s ^ mix64(p + 0x632BE59BD9B4E019ULL));
  return s;
}

}  // namespace cfdr::numerics
