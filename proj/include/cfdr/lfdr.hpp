#pragma once

// Local false discovery rate estimation from ranked p-values. The LFDR at the
// p-value of rank r is estimated by the NFDR estimate at level α = p_(2r) with
// x = 2r discoveries among N, or by 1 when r > N/2. Estimates are then made
// nondecreasing in rank by a running maximum.

#include <cfdr/nfdr.hpp>
#include <cfdr/numerics.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfdr::lfdr {

struct PValueEntry {
  std::string id;
  double p = 1.0;
};

/// P-values with a strict ranking. Ties in p are broken by a permutation drawn
/// from `tie_break_seed`, which is kept so the ranking can be reproduced.
class PValueSet {
 public:
  PValueSet() = default;

  PValueSet(std::vector<PValueEntry> entries, std::uint64_t tie_break_seed)
      : entries_(std::move(entries)), tie_break_seed_(tie_break_seed) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double p = entries_[i].p;
      if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("p-value for '" + entries_[i].id + "' outside [0,1]");
    }
    std::mt19937_64 rng(tie_break_seed_);
    std::vector<std::uint64_t> keys(entries_.size());
    for (auto& k : keys) k = rng();
    by_rank_.resize(entries_.size());
    std::iota(by_rank_.begin(), by_rank_.end(), std::size_t{0});
    std::sort(by_rank_.begin(), by_rank_.end(), [&](std::size_t a, std::size_t b) {
      if (entries_[a].p != entries_[b].p) return entries_[a].p < entries_[b].p;
      if (keys[a] != keys[b]) return keys[a] < keys[b];
      return a < b;
    });
    ranks_.resize(entries_.size());
    for (std::size_t r = 0; r < by_rank_.size(); ++r) ranks_[by_rank_[r]] = r + 1;
  }

  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] std::uint64_t tie_break_seed() const { return tie_break_seed_; }
  [[nodiscard]] const std::vector<PValueEntry>& entries() const { return entries_; }

  /// Rank (1-based) of the entry at input position i.
  [[nodiscard]] std::size_t rank_of(std::size_t i) const { return ranks_.at(i); }

  /// Input position of the entry holding rank r (1-based).
  [[nodiscard]] std::size_t index_at_rank(std::size_t r) const { return by_rank_.at(r - 1); }

  /// Entry holding rank r (1-based).
  [[nodiscard]] const PValueEntry& at_rank(std::size_t r) const { return entries_.at(by_rank_.at(r - 1)); }

  /// Order statistic p_(r).
  [[nodiscard]] double order_stat(std::size_t r) const { return at_rank(r).p; }

 private:
  std::vector<PValueEntry> entries_;
  std::uint64_t tie_break_seed_ = 0;
  std::vector<std::size_t> ranks_;
  std::vector<std::size_t> by_rank_;
};

struct LfdrEntry {
  std::string id;
  double p = 1.0;
  std::size_t rank = 0;
  double raw_estimate = 1.0;
  double monotone_estimate = 1.0;
};

struct LfdrResult {
  std::vector<LfdrEntry> entries;  ///< in rank order
  nfdr::EstimatorKind kind = nfdr::EstimatorKind::mle;
  std::vector<nfdr::NfdrEstimate> nfdr_trace;  ///< Φ*(p_(2r); 2r) for each r ≤ N/2
};

struct LfdrOptions {
  nfdr::EstimatorOptions estimator;
  /// Base seed for Monte Carlo means; rank r uses a stream derived from (seed, r).
  std::uint64_t seed = 0;
};

/// Running maximum in rank order.
inline std::vector<double> enforce_monotonicity(std::span<const double> estimates) {
  std::vector<double> out(estimates.begin(), estimates.end());
  for (std::size_t k = 1; k < out.size(); ++k) out[k] = std::max(out[k], out[k - 1]);
  return out;
}

/// True when rank r satisfies r ≤ N/2, compared on rationals.
constexpr bool has_doubled_rank(std::size_t r, std::size_t n) { return 2 * r <= n; }

inline LfdrResult lfdr_estimates(const PValueSet& pvals, nfdr::EstimatorKind kind,
                                 const LfdrOptions& options = {}) {
  const std::size_t n = pvals.size();
  if (n == 0) throw std::domain_error("lfdr_estimates: empty p-value set");
  const auto big_n = static_cast<std::int64_t>(n);

  LfdrResult result;
  result.kind = kind;
  result.entries.reserve(n);
  std::vector<double> raw(n, 1.0);
  for (std::size_t r = 1; has_doubled_rank(r, n); ++r) {
    auto opts = options.estimator;
    if (auto* mc = std::get_if<nfdr::MonteCarlo>(&opts.mean_method))
      mc->seed = numerics::derive_seed(options.seed, {r});
    const auto x = static_cast<std::int64_t>(2 * r);
    auto est = nfdr::estimate(kind, pvals.order_stat(2 * r), x, big_n, opts);
    raw[r - 1] = est.value;
    result.nfdr_trace.push_back(std::move(est));
  }
  const auto monotone = enforce_monotonicity(raw);
  for (std::size_t r = 1; r <= n; ++r) {
    const auto& e = pvals.at_rank(r);
    result.entries.push_back({e.id, e.p, r, raw[r - 1], monotone[r - 1]});
  }
  return result;
}

struct BhResult {
  std::vector<std::string> rejected_ids;  ///< in rank order
  std::size_t threshold_rank = 0;         ///< k*; 0 when nothing is rejected
  std::optional<double> threshold_p;      ///< p_(k*)
};

/// Step-up rule: reject the hypotheses of rank ≤ k*, where k* is the largest
/// k with Φ̂(p_(k); k, N) ≤ q. The comparison is made as p_(k) ≤ qk/N.
inline BhResult bh_reject(const PValueSet& pvals, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("bh_reject: q outside (0,1)");
  const std::size_t n = pvals.size();
  BhResult out;
  for (std::size_t k = n; k >= 1; --k) {
    if (pvals.order_stat(k) <= nfdr::mle_level_bound(q, static_cast<std::int64_t>(k), static_cast<std::int64_t>(n))) {
      out.threshold_rank = k;
      break;
    }
  }
  if (out.threshold_rank > 0) {
    out.threshold_p = pvals.order_stat(out.threshold_rank);
    for (std::size_t r = 1; r <= out.threshold_rank; ++r) out.rejected_ids.push_back(pvals.at_rank(r).id);
  }
  return out;
}

struct BhLinkReport {
  BhResult rejection;
  double q = 0.0;
  bool applicable = false;
  std::size_t median_rank = 0;          ///< lower median rank of the rejection set
  double median_p = 0.0;
  double mle_lfdr = 1.0;                ///< φ̂ at the median rank
  double achieved_level = 0.0;          ///< N·p_(k*)/k*
};

/// MLE LFDR at the median rejected rank, for reading a BH rejection set at
/// level q as a set of LFDR estimates. Equality with q is reported, not assumed.
inline BhLinkReport bh_lfdr_link(const PValueSet& pvals, double q) {
  BhLinkReport report;
  report.q = q;
  report.rejection = bh_reject(pvals, q);
  const auto k = report.rejection.threshold_rank;
  if (k == 0) return report;
  const std::size_t n = pvals.size();
  report.applicable = true;
  report.median_rank = (k + 1) / 2;
  report.median_p = pvals.order_stat(report.median_rank);
  if (has_doubled_rank(report.median_rank, n)) {
    const auto x = static_cast<std::int64_t>(2 * report.median_rank);
    report.mle_lfdr = nfdr::mle_nfdr(pvals.order_stat(2 * report.median_rank), x,
                                     static_cast<std::int64_t>(n)).value;
  }
  report.achieved_level = static_cast<double>(n) * pvals.order_stat(k) / static_cast<double>(k);
  return report;
}

}  // namespace cfdr::lfdr
