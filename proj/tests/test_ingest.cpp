#include <catch_amalgamated.hpp>

#include <cfdr/ingest.hpp>

#include "oracles.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <random>
#include <sstream>

using namespace cfdr;
using namespace cfdr::ingest;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

AbundanceMatrix make_matrix(std::vector<std::vector<double>> values, std::size_t n_case, std::size_t n_control) {
  AbundanceMatrix m;
  for (std::size_t j = 0; j < n_case; ++j) m.subjects.push_back({"c" + std::to_string(j), Group::case_});
  for (std::size_t j = 0; j < n_control; ++j) m.subjects.push_back({"h" + std::to_string(j), Group::control});
  for (std::size_t i = 0; i < values.size(); ++i) m.features.push_back("F" + std::to_string(i));
  m.values = std::move(values);
  return m;
}

AbundanceMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return parse_abundance_csv(in);
}

std::size_t parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const csv::ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("linear-interpolation quantile", "[ingest]") {
  CHECK_THAT(quantile_linear({1.0, 2.0, 3.0, 4.0}, 0.25), WithinAbs(1.75, 1e-15));
  CHECK_THAT(quantile_linear({4.0, 3.0, 1.0, 2.0}, 0.5), WithinAbs(2.5, 1e-15));
  CHECK(quantile_linear({7.0}, 0.25) == 7.0);
  CHECK(quantile_linear({1.0, 9.0}, 1.0) == 9.0);
  CHECK_THROWS_AS(quantile_linear({}, 0.25), std::domain_error);
}

TEST_CASE("shift-log transform", "[ingest]") {
  const auto flat = shift_log_transform(make_matrix({{1.0, 1.0, 1.0, 1.0}, {1.0, 1.0, 1.0, 1.0}}, 2, 2));
  for (const auto& row : flat.values)
    for (double v : row) CHECK_THAT(v, WithinAbs(std::log(2.0), 1e-15));

  // Control values only feed the quartile: (1, 2, 3, 4) → 1.75.
  const auto m = make_matrix({{100.0, 1.0, 2.0}, {-50.0, 3.0, 4.0}}, 1, 2);
  CHECK_THAT(control_quartile(m), WithinAbs(1.75, 1e-15));
  const auto bad = make_matrix({{-5.0, 1.0, 2.0}, {0.0, 3.0, 4.0}}, 1, 2);
  CHECK_THROWS_WITH(shift_log_transform(bad), ContainsSubstring("F0/c0"));

  // Order preserving.
  const auto grid = make_matrix({{0.5, 2.0, 1.0, 4.0, 3.0}}, 2, 3);
  const auto out = shift_log_transform(grid);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b)
      if (grid.values[0][a] < grid.values[0][b]) CHECK(out.values[0][a] < out.values[0][b]);
}

TEST_CASE("two-sample t-test reference values", "[ingest]") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{2, 3, 4};
  const auto r = two_sample_t(a, b);
  CHECK_THAT(r.statistic, WithinAbs(-1.224744871391589, 1e-12));
  CHECK(r.df == 4);
  CHECK_THAT(r.p, WithinAbs(0.2878641347266908, 1e-10));
  const boost::math::students_t_distribution<double> ref(4.0);
  CHECK_THAT(r.p, WithinAbs(2.0 * boost::math::cdf(ref, r.statistic), 1e-12));

  const auto same = two_sample_t(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p == 1.0);

  const std::vector<double> c{5, 5, 5};
  const auto flat = two_sample_t(c, c);
  CHECK(flat.zero_variance);
  CHECK(flat.p == 1.0);
  CHECK_THROWS_AS(two_sample_t(std::vector<double>{1.0}, b), std::domain_error);
}

TEST_CASE("t-test p-values are symmetric in the group labels and scale invariant", "[ingest]") {
  std::mt19937_64 rng(51);
  std::lognormal_distribution<double> draw(3.0, 0.5);
  std::vector<std::vector<double>> values(30, std::vector<double>(15));
  for (auto& row : values)
    for (auto& v : row) v = draw(rng);
  const auto m = make_matrix(values, 7, 8);
  // Swap after transforming: the shift is taken from the control group.
  auto swapped = shift_log_transform(m);
  for (auto& s : swapped.subjects) s.group = s.group == Group::case_ ? Group::control : Group::case_;
  auto scaled = m;
  for (auto& row : scaled.values)
    for (auto& v : row) v *= 37.5;

  const auto base = two_sample_t_tests(shift_log_transform(m));
  const auto flip = two_sample_t_tests(swapped);
  const auto big = two_sample_t_tests(shift_log_transform(scaled));
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK_THAT(flip[i].result.p, WithinAbs(base[i].result.p, 1e-12));
    CHECK_THAT(flip[i].result.statistic, WithinAbs(-base[i].result.statistic, 1e-12));
    CHECK_THAT(big[i].result.p, WithinAbs(base[i].result.p, 1e-9));
  }
}

TEST_CASE("null features give uniform p-values", "[ingest]") {
  std::mt19937_64 rng(52);
  std::normal_distribution<double> draw(10.0, 1.0);
  std::vector<std::vector<double>> values(1000, std::vector<double>(20));
  for (auto& row : values)
    for (auto& v : row) v = draw(rng);
  std::vector<double> p;
  for (const auto& t : two_sample_t_tests(make_matrix(values, 10, 10))) p.push_back(t.result.p);
  CHECK(oracle::ks_uniform(p) < 0.05);
}

TEST_CASE("abundance CSV round trip", "[ingest]") {
  const std::string text =
      "feature,s1:case,s2:case,s3:control,s4:control\n"
      "A,1.5,2,3,-0.25\n"
      "B,4,5,6,7\n";
  const auto m = parse(text);
  CHECK(m.features == std::vector<std::string>{"A", "B"});
  CHECK(m.count(Group::case_) == 2);
  CHECK(m.count(Group::control) == 2);
  CHECK(m.values[0][3] == -0.25);
  std::ostringstream out;
  write_abundance_csv(out, m);
  CHECK(out.str() == text);
}

TEST_CASE("abundance CSV errors carry line numbers", "[ingest]") {
  CHECK(parse_error_line("feature,s1:case,s2:control\nA,1,x\n") == 2);
  CHECK(parse_error_line("feature,s1:case,s2:control\nA,1\n") == 2);
  CHECK(parse_error_line("feature,s1:case,s2\nA,1,2\n") == 1);
  CHECK(parse_error_line("feature,s1:case,s2:sick\nA,1,2\n") == 1);
  CHECK(parse_error_line("feature,s1:case,s1:control\nA,1,2\n") == 1);
  CHECK(parse_error_line("feature,s1:case,s2:control\nA,1,2\nA,3,4\n") == 3);
  CHECK(parse_error_line("gene,s1:case\nA,1\n") == 1);
  CHECK_THROWS_AS(parse(""), csv::ParseError);
  CHECK_THROWS_AS(parse("feature,s1:case\n"), csv::ParseError);
}

TEST_CASE("p-value CSV", "[ingest]") {
  std::istringstream ok("id,p\na,0.5\nb,1e-3\n");
  const auto set = parse_pvalues_csv(ok);
  CHECK(set.size() == 2);
  CHECK(set.order_stat(1) == 1e-3);
  std::ostringstream out;
  write_pvalues_csv(out, set);
  CHECK(out.str() == "id,p\na,0.5\nb,0.001\n");

  auto fails_at = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_pvalues_csv(in);
    } catch (const csv::ParseError& e) {
      return e.line();
    }
    return 999;
  };
  CHECK(fails_at("id,p\na,0.5\nb,1.5\n") == 3);
  CHECK(fails_at("id,p\na,zero\n") == 2);
  CHECK(fails_at("id,p\na,0.1\na,0.2\n") == 3);
  CHECK(fails_at("name,pvalue\na,0.1\n") == 1);
  CHECK(fails_at("id,p\n") == 0);
  std::istringstream empty("id,p\n");
  CHECK_THROWS_WITH(parse_pvalues_csv(empty), ContainsSubstring("empty"));
}

TEST_CASE("bundled protein fixture", "[ingest]") {
  const auto m = load_abundance_csv(std::string(CFDR_DATA_DIR) + "/synthetic_proteins.csv");
  CHECK(m.features.size() == 20);
  CHECK(m.count(Group::case_) == 10);
  CHECK(m.count(Group::control) == 12);
  const auto pvals = two_sample_t_pvalues(shift_log_transform(m));
  REQUIRE(pvals.size() == 20);
  for (const auto& e : pvals.entries()) {
    CHECK(e.p >= 0.0);
    CHECK(e.p <= 1.0);
  }
  // The shifted proteins rank first.
  CHECK(pvals.at_rank(1).id == "P01");
  CHECK_THROWS_AS(load_abundance_csv("/nonexistent/file.csv"), csv::ParseError);
}
