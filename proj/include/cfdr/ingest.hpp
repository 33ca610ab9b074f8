#pragma once

// Abundance matrices for two-group studies: CSV loading, the shift-log
// transform, and equal-variance two-sample t-tests per feature.
//
// Abundance CSV header: `feature,<subject_id>:<group>,...` with group `case`
// or `control`; one row per feature. P-value CSV header: `id,p`.

#include <cfdr/csv.hpp>
#include <cfdr/distkit.hpp>
#include <cfdr/lfdr.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfdr::ingest {

enum class Group { case_, control };

inline std::string_view to_string(Group g) { return g == Group::case_ ? "case" : "control"; }

struct Subject {
  std::string id;
  Group group = Group::control;
};

struct AbundanceMatrix {
  std::vector<std::string> features;
  std::vector<Subject> subjects;
  std::vector<std::vector<double>> values;  ///< values[feature][subject]

  void validate() const {
    if (values.size() != features.size())
      throw std::invalid_argument("abundance matrix: row count does not match feature labels");
    for (const auto& row : values)
      if (row.size() != subjects.size())
        throw std::invalid_argument("abundance matrix: column count does not match subject labels");
  }

  [[nodiscard]] std::size_t count(Group g) const {
    return static_cast<std::size_t>(
        std::count_if(subjects.begin(), subjects.end(), [g](const Subject& s) { return s.group == g; }));
  }
};

/// Linear-interpolation quantile at position prob·(n-1) of the sorted sample
/// (1-based position prob·(n-1)+1).
inline double quantile_linear(std::vector<double> sample, double prob) {
  if (sample.empty()) throw std::domain_error("quantile: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::domain_error("quantile: probability outside [0,1]");
  std::sort(sample.begin(), sample.end());
  const double h = prob * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sample.size()) return sample.back();
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[lo + 1] - sample[lo]);
}

/// 25th percentile of all control-group values pooled over every feature.
inline double control_quartile(const AbundanceMatrix& m) {
  m.validate();
  std::vector<double> pooled;
  for (const auto& row : m.values)
    for (std::size_t j = 0; j < m.subjects.size(); ++j)
      if (m.subjects[j].group == Group::control) pooled.push_back(row[j]);
  if (pooled.empty()) throw std::domain_error("shift-log transform: no control-group values");
  return quantile_linear(std::move(pooled), 0.25);
}

/// v ↦ ln(v + q25) with q25 from control_quartile.
inline AbundanceMatrix shift_log_transform(const AbundanceMatrix& m) {
  const double shift = control_quartile(m);
  AbundanceMatrix out = m;
  std::vector<std::string> offending;
  for (std::size_t i = 0; i < m.values.size(); ++i)
    for (std::size_t j = 0; j < m.subjects.size(); ++j) {
      const double shifted = m.values[i][j] + shift;
      if (!(shifted > 0.0)) {
        offending.push_back(m.features[i] + "/" + m.subjects[j].id);
        continue;
      }
      out.values[i][j] = std::log(shifted);
    }
  if (!offending.empty()) {
    std::string msg = "shift-log transform: nonpositive shifted value (shift " + csv::format_number(shift) + ") at";
    for (std::size_t k = 0; k < offending.size() && k < 20; ++k) msg += " " + offending[k];
    if (offending.size() > 20) msg += " ... (" + std::to_string(offending.size()) + " cells)";
    throw std::domain_error(msg);
  }
  return out;
}

struct TTestResult {
  double statistic = 0.0;
  std::int64_t df = 0;
  double p = 1.0;
  bool zero_variance = false;
};

/// Pooled-variance two-sample t-test of first versus second, two-sided.
/// Zero pooled variance yields p = 1 with the flag set.
inline TTestResult two_sample_t(std::span<const double> first, std::span<const double> second) {
  const std::size_t n1 = first.size();
  const std::size_t n2 = second.size();
  if (n1 < 2 || n2 < 2) throw std::domain_error("t-test: need at least 2 observations per group");
  auto mean = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double m1 = mean(first);
  const double m2 = mean(second);
  double ss = 0.0;
  for (double x : first) ss += (x - m1) * (x - m1);
  for (double x : second) ss += (x - m2) * (x - m2);
  TTestResult r;
  r.df = static_cast<std::int64_t>(n1 + n2 - 2);
  const double pooled_var = ss / static_cast<double>(r.df);
  if (!(pooled_var > 0.0)) {
    r.zero_variance = true;
    return r;
  }
  r.statistic = (m1 - m2) / std::sqrt(pooled_var * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  r.p = std::min(1.0, 2.0 * dist::student_t_sf(std::fabs(r.statistic), r.df));
  return r;
}

struct FeatureTest {
  std::string feature;
  TTestResult result;
};

/// Case-versus-control test for every feature.
inline std::vector<FeatureTest> two_sample_t_tests(const AbundanceMatrix& m) {
  m.validate();
  if (m.count(Group::case_) < 2 || m.count(Group::control) < 2)
    throw std::domain_error("t-test: need at least 2 subjects in each group");
  std::vector<FeatureTest> out;
  out.reserve(m.features.size());
  std::vector<double> cases;
  std::vector<double> controls;
  for (std::size_t i = 0; i < m.features.size(); ++i) {
    cases.clear();
    controls.clear();
    for (std::size_t j = 0; j < m.subjects.size(); ++j)
      (m.subjects[j].group == Group::case_ ? cases : controls).push_back(m.values[i][j]);
    out.push_back({m.features[i], two_sample_t(cases, controls)});
  }
  return out;
}

inline lfdr::PValueSet two_sample_t_pvalues(const AbundanceMatrix& m, std::uint64_t tie_break_seed = 0) {
  std::vector<lfdr::PValueEntry> entries;
  for (auto& t : two_sample_t_tests(m)) entries.push_back({std::move(t.feature), t.result.p});
  return lfdr::PValueSet(std::move(entries), tie_break_seed);
}

// ---------------------------------------------------------------------------
// CSV

inline AbundanceMatrix parse_abundance_csv(std::istream& in, const std::string& source = "<abundance>") {
  AbundanceMatrix m;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::set<std::string> seen_features;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (!have_header) {
      if (fields.empty() || fields[0] != "feature")
        throw csv::ParseError(source, line_no, "missing header: expected first column 'feature'");
      if (fields.size() < 2) throw csv::ParseError(source, line_no, "header lists no subjects");
      std::set<std::string> seen;
      for (std::size_t k = 1; k < fields.size(); ++k) {
        const auto colon = fields[k].rfind(':');
        if (colon == std::string_view::npos)
          throw csv::ParseError(source, line_no, "subject column '" + std::string(fields[k]) +
                                                     "' lacks a ':<group>' label");
        const auto id = csv::trim(fields[k].substr(0, colon));
        const auto group = csv::trim(fields[k].substr(colon + 1));
        if (id.empty()) throw csv::ParseError(source, line_no, "empty subject id in column " + std::to_string(k + 1));
        Group g;
        if (group == "case")
          g = Group::case_;
        else if (group == "control")
          g = Group::control;
        else
          throw csv::ParseError(source, line_no, "unknown group label '" + std::string(group) +
                                                     "' (expected 'case' or 'control')");
        if (!seen.emplace(id).second)
          throw csv::ParseError(source, line_no, "duplicate subject id '" + std::string(id) + "'");
        m.subjects.push_back({std::string(id), g});
      }
      have_header = true;
      continue;
    }
    if (fields.size() != m.subjects.size() + 1)
      throw csv::ParseError(source, line_no, "expected " + std::to_string(m.subjects.size() + 1) +
                                                 " fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) throw csv::ParseError(source, line_no, "empty feature label");
    if (!seen_features.emplace(fields[0]).second)
      throw csv::ParseError(source, line_no, "duplicate feature '" + std::string(fields[0]) + "'");
    std::vector<double> row;
    row.reserve(m.subjects.size());
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v;
      if (!csv::parse_double(fields[k], v) || !std::isfinite(v))
        throw csv::ParseError(source, line_no, "non-numeric value '" + std::string(fields[k]) + "' in column " +
                                                   std::to_string(k + 1));
      row.push_back(v);
    }
    m.features.emplace_back(fields[0]);
    m.values.push_back(std::move(row));
  }
  if (!have_header) throw csv::ParseError(source, 0, "missing header");
  if (m.features.empty()) throw csv::ParseError(source, 0, "no feature rows");
  return m;
}

inline AbundanceMatrix load_abundance_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw csv::ParseError(path, 0, "cannot open file");
  return parse_abundance_csv(in, path);
}

inline void write_abundance_csv(std::ostream& out, const AbundanceMatrix& m) {
  m.validate();
  out << "feature";
  for (const auto& s : m.subjects) out << ',' << s.id << ':' << to_string(s.group);
  out << '\n';
  for (std::size_t i = 0; i < m.features.size(); ++i) {
    out << m.features[i];
    for (double v : m.values[i]) out << ',' << csv::format_number(v);
    out << '\n';
  }
}

inline lfdr::PValueSet parse_pvalues_csv(std::istream& in, const std::string& source = "<p-values>",
                                         std::uint64_t tie_break_seed = 0) {
  std::vector<lfdr::PValueEntry> entries;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (!have_header) {
      if (fields.size() != 2 || fields[0] != "id" || fields[1] != "p")
        throw csv::ParseError(source, line_no, "missing header: expected 'id,p'");
      have_header = true;
      continue;
    }
    if (fields.size() != 2)
      throw csv::ParseError(source, line_no, "expected 2 fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) throw csv::ParseError(source, line_no, "empty id");
    double p;
    if (!csv::parse_double(fields[1], p))
      throw csv::ParseError(source, line_no, "non-numeric p-value '" + std::string(fields[1]) + "'");
    if (!(p >= 0.0 && p <= 1.0))
      throw csv::ParseError(source, line_no, "p-value " + std::string(fields[1]) + " outside [0,1]");
    if (!seen.emplace(fields[0]).second)
      throw csv::ParseError(source, line_no, "duplicate id '" + std::string(fields[0]) + "'");
    entries.push_back({std::string(fields[0]), p});
  }
  if (!have_header) throw csv::ParseError(source, 0, "missing header");
  if (entries.empty()) throw csv::ParseError(source, 0, "no p-values (empty set)");
  return lfdr::PValueSet(std::move(entries), tie_break_seed);
}

inline lfdr::PValueSet load_pvalues_csv(const std::string& path, std::uint64_t tie_break_seed = 0) {
  std::ifstream in(path);
  if (!in) throw csv::ParseError(path, 0, "cannot open file");
  return parse_pvalues_csv(in, path, tie_break_seed);
}

/// Writes entries in input order.
inline void write_pvalues_csv(std::ostream& out, const lfdr::PValueSet& pvals) {
  out << "id,p\n";
  for (const auto& e : pvals.entries()) out << e.id << ',' << csv::format_number(e.p) << '\n';
}

}  // namespace cfdr::ingest
