#pragma once

// Subcommands of the `cfdr` executable. Everything here writes to caller
// supplied streams or files, so tests can run commands in-process.

#include <cfdr/cfdr.hpp>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace cfdr::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<std::monostate, std::string, double, std::int64_t>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& out) const {
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) out << ',';
        std::visit(
            [&out](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>)
                out << csv::format_number(v);
              else if constexpr (!std::is_same_v<T, std::monostate>)
                out << v;
            },
            row[k]);
      }
      out << '\n';
    }
  }

  [[nodiscard]] nlohmann::json to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t k = 0; k < row.size(); ++k)
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, std::monostate>)
                obj[header[k]] = nullptr;
              else
                obj[header[k]] = v;
            },
            row[k]);
      arr.push_back(std::move(obj));
    }
    return arr;
  }
};

inline Table lfdr_table(const lfdr::LfdrResult& result, bool with_monotone) {
  Table t{{"id", "p", "rank", "raw_lfdr"}, {}};
  if (with_monotone) t.header.emplace_back("monotone_lfdr");
  for (const auto& e : result.entries) {
    std::vector<Cell> row{e.id, e.p, static_cast<std::int64_t>(e.rank), e.raw_estimate};
    if (with_monotone) row.emplace_back(e.monotone_estimate);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table metrics_table(const std::vector<sim::MetricsRow>& rows) {
  Table t{{"pi0", "n", "estimator", "rmse", "conservatism_proportion", "bias", "replicates", "estimates"}, {}};
  for (const auto& r : rows)
    t.rows.push_back({r.pi0, static_cast<std::int64_t>(r.n), std::string(nfdr::to_string(r.estimator)), r.rmse,
                      r.conservatism_proportion, r.bias, static_cast<std::int64_t>(r.replicate_count),
                      static_cast<std::int64_t>(r.estimate_count)});
  return t;
}

/// Rows for every (alpha, pi) pair; cells with pi < alpha are left empty.
inline Table coverage_table(std::int64_t n, const std::vector<double>& alphas, const std::vector<double>& pis,
                            nfdr::EstimatorKind kind) {
  Table t{{"alpha", "pi", "coverage"}, {}};
  for (double a : alphas)
    for (double p : pis) {
      if (p < a) {
        t.rows.push_back({a, p, std::monostate{}});
        continue;
      }
      t.rows.push_back({a, p, sim::exact_small_n_coverage(n, a, p, kind)});
    }
  return t;
}

// ---------------------------------------------------------------------------
// Argument helpers

/// "a,b,c" or an inclusive range "start:step:stop". Range values are rounded
/// to 1e-12 so decimal steps land on their decimal values.
inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  auto num = [&spec](std::string_view f) {
    double v;
    if (!csv::parse_double(csv::trim(f), v) || !std::isfinite(v))
      throw UsageError("invalid number '" + std::string(f) + "' in grid '" + spec + "'");
    return v;
  };
  if (spec.find(':') != std::string::npos) {
    const auto parts = csv::split(spec, ':');
    if (parts.size() != 3) throw UsageError("range grid must be start:step:stop, got '" + spec + "'");
    const double start = num(parts[0]);
    const double step = num(parts[1]);
    const double stop = num(parts[2]);
    if (!(step > 0.0) || stop < start) throw UsageError("empty or invalid range grid '" + spec + "'");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) {
      const double v = std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12;
      out.push_back(std::min(v, stop));
    }
  } else {
    for (auto f : csv::split(spec)) out.push_back(num(f));
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

inline std::vector<std::size_t> parse_count_grid(const std::string& spec) {
  std::vector<std::size_t> out;
  for (double v : parse_grid(spec)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("grid '" + spec + "' must hold positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline std::vector<nfdr::EstimatorKind> parse_estimators(const std::string& spec) {
  std::vector<nfdr::EstimatorKind> out;
  for (auto f : csv::split(spec)) {
    try {
      out.push_back(nfdr::parse_estimator_kind(f));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("no estimators given");
  return out;
}

inline nfdr::EstimatorKind parse_estimator(const std::string& name) {
  try {
    return nfdr::parse_estimator_kind(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

/// CFDR_SEED when set, otherwise a fixed default.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("CFDR_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
  }
  return 20110401;
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw csv::ParseError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Run record written next to an output file. `argv` is enough to rerun the
/// command; everything else is for audit.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<std::string> inputs;

  [[nodiscard]] nlohmann::json to_json(const std::vector<std::string>& outputs) const {
    nlohmann::json j;
    j["command"] = command;
    j["argv"] = argv;
    j["parameters"] = parameters;
    j["seeds"] = seeds;
    j["tool_version"] = kVersion;
    j["timestamp"] = utc_timestamp();
    auto digest = [](const std::string& p) {
      return nlohmann::json{{"path", p}, {"sha256", sha256_hex(read_file(p))}};
    };
    j["inputs"] = nlohmann::json::array();
    for (const auto& p : inputs) j["inputs"].push_back(digest(p));
    j["outputs"] = nlohmann::json::array();
    for (const auto& p : outputs) j["outputs"].push_back(digest(p));
    return j;
  }
};

// ---------------------------------------------------------------------------
// Output plumbing

struct OutputSpec {
  std::string out_path;       ///< empty: standard output
  std::string json_path;      ///< optional JSON mirror of the table
  std::string manifest_path;  ///< defaults to <out>.manifest.json when out is a file
};

inline void write_text(const OutputSpec& spec, std::ostream& out, const std::string& text) {
  if (spec.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(spec.out_path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + spec.out_path + "'");
  f << text;
}

inline void finish(const OutputSpec& spec, std::ostream& out, const std::string& text, const Table* table,
                   const RunManifest& manifest) {
  write_text(spec, out, text);
  std::vector<std::string> outputs;
  if (!spec.out_path.empty()) outputs.push_back(spec.out_path);
  if (!spec.json_path.empty()) {
    if (!table) throw UsageError("--json is not supported for this command");
    std::ofstream f(spec.json_path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + spec.json_path + "'");
    f << table->to_json().dump(2) << '\n';
    outputs.push_back(spec.json_path);
  }
  std::string manifest_path = spec.manifest_path;
  if (manifest_path.empty() && !spec.out_path.empty()) manifest_path = spec.out_path + ".manifest.json";
  if (!manifest_path.empty()) {
    std::ofstream f(manifest_path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + manifest_path + "'");
    f << manifest.to_json(outputs).dump(2) << '\n';
  }
}

inline void add_output_options(CLI::App* cmd, OutputSpec& spec, bool json_mirror) {
  cmd->add_option("-o,--out", spec.out_path, "Output file (default: standard output)");
  if (json_mirror) cmd->add_option("--json", spec.json_path, "Also write the table as JSON to this file");
  cmd->add_option("--manifest", spec.manifest_path, "Manifest path (default: <out>.manifest.json)");
}

// ---------------------------------------------------------------------------
// Commands

struct LfdrArgs {
  std::string input;
  std::string estimator = "corrected";
  std::size_t mc_draws = 100;
  std::uint64_t seed = 0;
  std::optional<double> weight;
  bool quadrature = false;
  std::string cap = "per-draw";
  bool no_monotone = false;
  OutputSpec output;
};

inline void cmd_lfdr(const LfdrArgs& a, RunManifest manifest, std::ostream& out) {
  const auto kind = parse_estimator(a.estimator);
  if (a.mc_draws < 1) throw UsageError("--mc-draws must be >= 1");
  if (a.weight && !(*a.weight >= 0.0 && *a.weight <= 1.0)) throw UsageError("--weight must lie in [0,1]");
  if (a.cap != "per-draw" && a.cap != "final") throw UsageError("--cap must be per-draw or final");
  const auto pvals = ingest::load_pvalues_csv(a.input, a.seed);

  lfdr::LfdrOptions opts;
  opts.seed = a.seed;
  opts.estimator.weight = a.weight;
  opts.estimator.cap = a.cap == "final" ? nfdr::CapPlacement::final_mean : nfdr::CapPlacement::per_draw;
  if (a.quadrature)
    opts.estimator.mean_method = nfdr::Quadrature{};
  else
    opts.estimator.mean_method = nfdr::MonteCarlo{.draws = a.mc_draws};
  const auto result = lfdr::lfdr_estimates(pvals, kind, opts);
  const auto table = lfdr_table(result, !a.no_monotone);

  std::ostringstream text;
  table.write_csv(text);
  manifest.parameters = {{"input", a.input},
                         {"estimator", nfdr::to_string(kind)},
                         {"weight", opts.estimator.weight_for(kind)},
                         {"mean_method", a.quadrature ? "quadrature" : "monte_carlo"},
                         {"mc_draws", a.mc_draws},
                         {"cap", a.cap},
                         {"monotone", !a.no_monotone}};
  manifest.seeds = {{"seed", a.seed}, {"tie_break_seed", pvals.tie_break_seed()}};
  manifest.inputs = {a.input};
  finish(a.output, out, text.str(), &table, manifest);
}

struct BhArgs {
  std::string input;
  double q = 0.05;
  std::uint64_t seed = 0;
  OutputSpec output;
};

inline std::string bh_report(const lfdr::PValueSet& pvals, const lfdr::BhLinkReport& link) {
  std::ostringstream s;
  const auto& rej = link.rejection;
  s << "id,p,rank,rejected\n";
  for (std::size_t r = 1; r <= pvals.size(); ++r) {
    const auto& e = pvals.at_rank(r);
    s << e.id << ',' << csv::format_number(e.p) << ',' << r << ',' << (r <= rej.threshold_rank ? 1 : 0) << '\n';
  }
  s << "# q=" << csv::format_number(link.q) << " n=" << pvals.size() << " rejections=" << rej.rejected_ids.size()
    << " threshold_rank=" << rej.threshold_rank;
  if (rej.threshold_p) s << " threshold_p=" << csv::format_number(*rej.threshold_p);
  s << '\n';
  if (!link.applicable) {
    s << "# lfdr_link: not applicable (no rejections)\n";
  } else {
    s << "# lfdr_link: median_rank=" << link.median_rank << " median_p=" << csv::format_number(link.median_p)
      << " mle_lfdr=" << csv::format_number(link.mle_lfdr)
      << " achieved_level=" << csv::format_number(link.achieved_level) << " q=" << csv::format_number(link.q)
      << '\n';
  }
  return s.str();
}

inline void cmd_bh(const BhArgs& a, RunManifest manifest, std::ostream& out) {
  if (!(a.q > 0.0 && a.q < 1.0)) throw UsageError("--q must lie in (0,1)");
  const auto pvals = ingest::load_pvalues_csv(a.input, a.seed);
  const auto link = lfdr::bh_lfdr_link(pvals, a.q);
  manifest.parameters = {{"input", a.input}, {"q", a.q}};
  manifest.seeds = {{"tie_break_seed", a.seed}};
  manifest.inputs = {a.input};
  finish(a.output, out, bh_report(pvals, link), nullptr, manifest);
}

struct SimulateArgs {
  std::string pi0_grid = "0.5,0.75,0.9,1";
  std::string n_grid = "2,4,8,16,32";
  double delta = 2.0;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  std::string estimators = "mle,corrected,mean";
  std::size_t mc_draws = 100;
  unsigned threads = 0;
  std::string pooling = "pooled";
  OutputSpec output;
};

inline void cmd_simulate(const SimulateArgs& a, RunManifest manifest, std::ostream& out) {
  sim::SimulationConfig cfg;
  cfg.pi0_grid = parse_grid(a.pi0_grid);
  cfg.n_grid = parse_count_grid(a.n_grid);
  cfg.delta = a.delta;
  cfg.replicates = a.reps;
  cfg.seed = a.seed;
  cfg.estimators = parse_estimators(a.estimators);
  cfg.mc_draws = a.mc_draws;
  cfg.threads = a.threads ? a.threads : std::max(1u, std::thread::hardware_concurrency());
  if (a.pooling == "pooled")
    cfg.pooling = sim::Pooling::pooled;
  else if (a.pooling == "replicate-mean")
    cfg.pooling = sim::Pooling::replicate_mean;
  else
    throw UsageError("--pooling must be pooled or replicate-mean");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto table = metrics_table(sim::run_grid(cfg));
  std::ostringstream text;
  table.write_csv(text);
  std::vector<std::string> est_names;
  for (auto k : cfg.estimators) est_names.emplace_back(nfdr::to_string(k));
  manifest.parameters = {{"pi0_grid", cfg.pi0_grid}, {"n_grid", cfg.n_grid},   {"delta", cfg.delta},
                         {"replicates", cfg.replicates}, {"estimators", est_names}, {"mc_draws", cfg.mc_draws},
                         {"pooling", a.pooling}};
  manifest.seeds = {{"seed", cfg.seed}};
  finish(a.output, out, text.str(), &table, manifest);
}

struct CoverageArgs {
  std::int64_t n = 1;
  std::string alpha_grid = "0.01,0.05,0.1,0.2,0.3,0.5";
  std::string pi_grid = "0.01:0.01:1";
  std::string estimator = "corrected";
  OutputSpec output;
};

inline void cmd_coverage(const CoverageArgs& a, RunManifest manifest, std::ostream& out) {
  if (a.n < 1 || a.n > 5) throw UsageError("--n must be in 1..5");
  const auto kind = parse_estimator(a.estimator);
  const auto alphas = parse_grid(a.alpha_grid);
  const auto pis = parse_grid(a.pi_grid);
  for (double v : alphas)
    if (!(v > 0.0 && v <= 1.0)) throw UsageError("alpha grid values must lie in (0,1]");
  for (double v : pis)
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("pi grid values must lie in [0,1]");
  const auto table = coverage_table(a.n, alphas, pis, kind);
  std::ostringstream text;
  table.write_csv(text);
  manifest.parameters = {{"n", a.n}, {"alpha_grid", alphas}, {"pi_grid", pis}, {"estimator", nfdr::to_string(kind)}};
  finish(a.output, out, text.str(), &table, manifest);
}

struct TtestArgs {
  std::string input;
  std::string transform = "shift-log";
  OutputSpec output;
};

inline void cmd_ttest(const TtestArgs& a, RunManifest manifest, std::ostream& out, std::ostream& err) {
  if (a.transform != "shift-log" && a.transform != "none") throw UsageError("--transform must be shift-log or none");
  auto m = ingest::load_abundance_csv(a.input);
  if (a.transform == "shift-log") m = ingest::shift_log_transform(m);
  const auto tests = ingest::two_sample_t_tests(m);
  Table table{{"id", "p"}, {}};
  for (const auto& t : tests) {
    if (t.result.zero_variance) err << "warning: zero pooled variance for '" << t.feature << "'; p set to 1\n";
    table.rows.push_back({t.feature, t.result.p});
  }
  std::ostringstream text;
  table.write_csv(text);
  manifest.parameters = {{"input", a.input}, {"transform", a.transform}};
  manifest.inputs = {a.input};
  finish(a.output, out, text.str(), &table, manifest);
}

// ---------------------------------------------------------------------------
// Dispatch

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

namespace detail {

inline int rerun(const std::string& manifest_path, const std::string& out_override, std::ostream& out,
                 std::ostream& err) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw csv::ParseError(manifest_path, 0, std::string("invalid manifest: ") + e.what());
  }
  if (!j.contains("argv") || !j["argv"].is_array()) throw csv::ParseError(manifest_path, 0, "manifest lacks argv");
  auto argv = j["argv"].get<std::vector<std::string>>();
  if (!out_override.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < argv.size(); ++i)
      if (argv[i] == "-o" || argv[i] == "--out") {
        argv[i + 1] = out_override;
        replaced = true;
      }
    if (!replaced) {
      argv.emplace_back("--out");
      argv.push_back(out_override);
    }
  }
  return run(std::move(argv), out, err);
}

}  // namespace detail

/// Runs one command line (without the program name). Returns the exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conservative false discovery rate estimation from few p-values", "cfdr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  const auto seed = default_seed();
  LfdrArgs lfdr_args;
  lfdr_args.seed = seed;
  auto* lfdr_cmd = app.add_subcommand("lfdr", "LFDR estimates for a p-value CSV (id,p)");
  lfdr_cmd->add_option("input", lfdr_args.input, "P-value CSV")->required();
  lfdr_cmd->add_option("--estimator", lfdr_args.estimator, "mle | corrected | mean")->capture_default_str();
  lfdr_cmd->add_option("--mc-draws", lfdr_args.mc_draws, "Monte Carlo draws for the mean")->capture_default_str();
  lfdr_cmd->add_option("--seed", lfdr_args.seed, "Seed for tie-breaking and Monte Carlo (env CFDR_SEED)")
      ->capture_default_str();
  lfdr_cmd->add_option("--weight", lfdr_args.weight, "Weight C of the significance function");
  lfdr_cmd->add_flag("--quadrature", lfdr_args.quadrature, "Compute the mean by quadrature");
  lfdr_cmd->add_option("--cap", lfdr_args.cap, "Cap placement for the mean: per-draw | final")->capture_default_str();
  lfdr_cmd->add_flag("--no-monotone", lfdr_args.no_monotone, "Omit the monotone_lfdr column");
  add_output_options(lfdr_cmd, lfdr_args.output, true);

  BhArgs bh_args;
  bh_args.seed = seed;
  auto* bh_cmd = app.add_subcommand("bh", "Benjamini-Hochberg rejections with the LFDR reading of q");
  bh_cmd->add_option("input", bh_args.input, "P-value CSV")->required();
  bh_cmd->add_option("--q", bh_args.q, "Level q in (0,1)")->required();
  bh_cmd->add_option("--seed", bh_args.seed, "Tie-break seed (env CFDR_SEED)")->capture_default_str();
  add_output_options(bh_cmd, bh_args.output, false);

  SimulateArgs sim_args;
  sim_args.seed = seed;
  auto* sim_cmd = app.add_subcommand("simulate", "Mixture-model simulation grid (metrics CSV)");
  sim_cmd->add_option("--pi0-grid", sim_args.pi0_grid, "pi0 values")->capture_default_str();
  sim_cmd->add_option("--n-grid", sim_args.n_grid, "Numbers of hypotheses")->capture_default_str();
  sim_cmd->add_option("--delta", sim_args.delta, "Noncentrality of the alternative")->capture_default_str();
  sim_cmd->add_option("--reps", sim_args.reps, "Replicates per cell")->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.seed, "Base seed (env CFDR_SEED)")->capture_default_str();
  sim_cmd->add_option("--estimators", sim_args.estimators, "Comma-separated estimators")->capture_default_str();
  sim_cmd->add_option("--mc-draws", sim_args.mc_draws, "Monte Carlo draws for the mean")->capture_default_str();
  sim_cmd->add_option("--threads", sim_args.threads, "Worker threads (0: all cores)")->capture_default_str();
  sim_cmd->add_option("--pooling", sim_args.pooling, "pooled | replicate-mean")->capture_default_str();
  add_output_options(sim_cmd, sim_args.output, true);

  CoverageArgs cov_args;
  auto* cov_cmd = app.add_subcommand("coverage", "Exact Pr(estimate >= alpha/pi) for N <= 5");
  cov_cmd->add_option("--n", cov_args.n, "Number of hypotheses (1..5)")->required();
  cov_cmd->add_option("--alpha-grid", cov_args.alpha_grid, "Test-wise levels")->capture_default_str();
  cov_cmd->add_option("--pi-grid", cov_args.pi_grid, "Discovery probabilities")->capture_default_str();
  cov_cmd->add_option("--estimator", cov_args.estimator, "mle | corrected | mean")->capture_default_str();
  add_output_options(cov_cmd, cov_args.output, true);

  TtestArgs tt_args;
  auto* tt_cmd = app.add_subcommand("ttest", "Per-feature case/control t-test p-values from an abundance CSV");
  tt_cmd->add_option("input", tt_args.input, "Abundance CSV")->required();
  tt_cmd->add_option("--transform", tt_args.transform, "shift-log | none")->capture_default_str();
  add_output_options(tt_cmd, tt_args.output, true);

  std::string manifest_in;
  std::string rerun_out;
  auto* rerun_cmd = app.add_subcommand("rerun", "Repeat the command recorded in a manifest");
  rerun_cmd->add_option("manifest", manifest_in, "Manifest JSON")->required();
  rerun_cmd->add_option("-o,--out", rerun_out, "Replace the recorded output path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  RunManifest manifest;
  manifest.argv = args;
  // Record the resolved seed so a rerun does not depend on CFDR_SEED.
  for (auto* cmd : {lfdr_cmd, bh_cmd, sim_cmd})
    if (cmd->parsed() && cmd->count("--seed") == 0) {
      manifest.argv.emplace_back("--seed");
      manifest.argv.push_back(std::to_string(seed));
    }
  try {
    if (lfdr_cmd->parsed()) {
      manifest.command = "lfdr";
      cmd_lfdr(lfdr_args, manifest, out);
    } else if (bh_cmd->parsed()) {
      manifest.command = "bh";
      cmd_bh(bh_args, manifest, out);
    } else if (sim_cmd->parsed()) {
      manifest.command = "simulate";
      cmd_simulate(sim_args, manifest, out);
    } else if (cov_cmd->parsed()) {
      manifest.command = "coverage";
      cmd_coverage(cov_args, manifest, out);
    } else if (tt_cmd->parsed()) {
      manifest.command = "ttest";
      cmd_ttest(tt_args, manifest, out, err);
    } else if (rerun_cmd->parsed()) {
      return detail::rerun(manifest_in, rerun_out, out, err);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const csv::ParseError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::domain_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  }
  return kOk;
}

}  // namespace cfdr::cli
