#ifndef UDFP_CLI_HPP
#define UDFP_CLI_HPP

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "udfp/backtest.hpp"
#include "udfp/error.hpp"
#include "udfp/factor_alphas.hpp"
#include "udfp/factor_markets.hpp"
#include "udfp/ingest.hpp"

namespace udfp::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kConfigEnv = "UDFP_CONFIG";

enum ExitCode : int { ok = 0, usage = 1, data = 2, internal = 3, violated = 4 };

/// Bad flag values detected after parsing; maps to exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ConfigMap = std::map<std::string, std::string>;

/// Flat `key=value` lines; `#` starts a comment line; keys are long flag names without dashes.
inline ConfigMap read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  ConfigMap out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(0, "cannot open '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

inline std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(0, "cannot write '" + path.string() + "'");
  out << text;
}

/// Everything needed to rerun a command bit-exactly.
struct RunManifest {
  std::string command;
  ConfigMap config;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::vector<std::string> outputs;
  std::string started;
  std::string finished;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = "udfp";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    j["inputs"] = nlohmann::json::array();
    for (const auto& [p, h] : inputs) j["inputs"].push_back({{"path", p}, {"sha256", h}});
    j["outputs"] = outputs;
    if (config.count("seed")) j["seed"] = config.at("seed");
    j["started"] = started;
    j["finished"] = finished;
    return j;
  }
};

// --- option sets -------------------------------------------------------------

struct RunOptions {
  std::string prices;
  std::string factor;
  std::string factors;
  std::size_t managers = 10'000;
  std::uint64_t seed = 0;
  std::string resample = "weekly-median";
  std::size_t min_history = 4000;
  double min_price = 1.0;
  int span = 10;
  std::string output_dir;
  unsigned threads = 1;
  std::string window_start;
  std::string window_end;
  std::string ensemble = "redraw";
  std::string config;

  void add_to(CLI::App& app, bool multi) {
    app.add_option("--prices", prices, "Long-format price CSV (date,ticker,price)")->required();
    if (multi) {
      app.add_option("--factors", factors, "Comma-separated factors to compare")->required();
    } else {
      app.add_option("--factor", factor, "uniform|size|momentum|sharpe|compound")->required();
    }
    app.add_option("--managers", managers, "Dirichlet managers sampled per period")->capture_default_str();
    app.add_option("--seed", seed, "Master seed")->required();
    app.add_option("--resample", resample, "daily|weekly-median")->capture_default_str();
    app.add_option("--min-history", min_history, "Minimum present daily observations per ticker")->capture_default_str();
    app.add_option("--min-price", min_price, "Drop tickers whose minimum price is below this")->capture_default_str();
    app.add_option("--span", span, "EWMA span / rolling window for the Sharpe factor")->capture_default_str();
    app.add_option("--output-dir", output_dir, "Directory for wealth.csv, weights.csv, metrics.txt, manifest.json")
        ->required();
    app.add_option("--threads", threads, "Worker threads (results do not depend on it)")->capture_default_str();
    app.add_option("--window-start", window_start, "First date of the backtest window (YYYY-MM-DD)");
    app.add_option("--window-end", window_end, "Last date of the backtest window (YYYY-MM-DD)");
    app.add_option("--ensemble", ensemble, "redraw|persistent")->capture_default_str();
    app.add_option("--config", config, "Flat key=value config file (env UDFP_CONFIG)");
  }

  ConfigMap resolved(bool multi) const {
    ConfigMap m{{"prices", prices},
                {"managers", std::to_string(managers)},
                {"seed", std::to_string(seed)},
                {"resample", resample},
                {"min-history", std::to_string(min_history)},
                {"min-price", format_double(min_price)},
                {"span", std::to_string(span)},
                {"output-dir", output_dir},
                {"threads", std::to_string(threads)},
                {"ensemble", ensemble}};
    if (multi) {
      m["factors"] = factors;
    } else {
      m["factor"] = factor;
    }
    if (!window_start.empty()) m["window-start"] = window_start;
    if (!window_end.empty()) m["window-end"] = window_end;
    return m;
  }
};

inline FactorKind factor_or_usage(const std::string& name) {
  if (auto k = parse_factor(name)) return *k;
  std::string allowed;
  for (FactorKind f : kAllFactors) allowed += (allowed.empty() ? "" : "|") + std::string(to_string(f));
  throw UsageError("unknown factor '" + name + "'; allowed: " + allowed);
}

inline BacktestConfig to_backtest_config(const RunOptions& o, FactorKind kind) {
  BacktestConfig c;
  c.factor = kind;
  c.managers = o.managers;
  c.seed = o.seed;
  if (o.resample == "daily") {
    c.resample = Resample::daily;
  } else if (o.resample == "weekly-median") {
    c.resample = Resample::weekly_median;
  } else {
    throw UsageError("unknown --resample '" + o.resample + "'; allowed: daily|weekly-median");
  }
  if (o.ensemble == "redraw") {
    c.ensemble = EnsembleMode::redraw;
  } else if (o.ensemble == "persistent") {
    c.ensemble = EnsembleMode::persistent;
  } else {
    throw UsageError("unknown --ensemble '" + o.ensemble + "'; allowed: redraw|persistent");
  }
  if (o.managers < 1) throw UsageError("--managers must be >= 1");
  if (o.span < 2) throw UsageError("--span must be >= 2");
  if (o.threads < 1) throw UsageError("--threads must be >= 1");
  auto date = [](const std::string& s, const char* flag) -> std::optional<Date> {
    if (s.empty()) return std::nullopt;
    auto d = parse_date(s);
    if (!d) throw UsageError(std::string(flag) + " expects YYYY-MM-DD, got '" + s + "'");
    return d;
  };
  c.window_start = date(o.window_start, "--window-start");
  c.window_end = date(o.window_end, "--window-end");
  if (c.window_start && c.window_end && !(*c.window_start < *c.window_end)) {
    throw UsageError("--window-start must precede --window-end");
  }
  c.history_filter = o.min_history;
  c.min_price = o.min_price;
  c.span = o.span;
  c.threads = o.threads;
  return c;
}

struct VerifyOptions {
  std::size_t instances = 10'000;
  std::size_t max_assets = 50;
  std::size_t max_periods = 100;
  std::size_t identity_instances = 100;
  std::size_t identity_max_assets = 10;
  std::size_t identity_max_periods = 500;
  std::size_t bound_instances = 1000;
  std::size_t bound_max_assets = 10;
  std::size_t bound_max_periods = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string beta;
  std::uint64_t periods = 1;
  std::string config;

  void add_to(CLI::App& app) {
    app.add_option("--instances", instances, "Random F_n / Cauchy-Schwarz instances")->capture_default_str();
    app.add_option("--max-assets", max_assets, "Largest m for F_n instances")->capture_default_str();
    app.add_option("--max-periods", max_periods, "Largest n for F_n instances")->capture_default_str();
    app.add_option("--identity-instances", identity_instances, "Single-factor identity instances")->capture_default_str();
    app.add_option("--identity-max-assets", identity_max_assets)->capture_default_str();
    app.add_option("--identity-max-periods", identity_max_periods)->capture_default_str();
    app.add_option("--bound-instances", bound_instances, "Two-factor bound instances")->capture_default_str();
    app.add_option("--bound-max-assets", bound_max_assets)->capture_default_str();
    app.add_option("--bound-max-periods", bound_max_periods)->capture_default_str();
    app.add_option("--seed", seed, "Master seed")->capture_default_str();
    app.add_option("--threads", threads)->capture_default_str();
    app.add_option("--beta", beta, "Check one comma-separated beta vector instead of random suites");
    app.add_option("--periods", periods, "n used with --beta")->capture_default_str();
    app.add_option("--config", config, "Flat key=value config file (env UDFP_CONFIG)");
  }
};

struct GenOptions {
  std::size_t assets = 20;
  std::size_t days = 4200;
  std::string model = "single-factor";
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string scenario = "none";
  double idio_vol = 0.0;
  std::string start_date = "2007-08-01";
  std::string config;

  void add_to(CLI::App& app) {
    app.add_option("--assets", assets)->capture_default_str();
    app.add_option("--days", days, "Business days to generate")->capture_default_str();
    app.add_option("--model", model, "single-factor|two-factor")->capture_default_str();
    app.add_option("--seed", seed)->required();
    app.add_option("--output-dir", output_dir, "Directory for prices.csv and manifest.json")->required();
    app.add_option("--scenario", scenario, "none|tilted (cheap assets carry the highest beta)")->capture_default_str();
    app.add_option("--idio-vol", idio_vol, "Idiosyncratic daily log-vol")->capture_default_str();
    app.add_option("--start-date", start_date)->capture_default_str();
    app.add_option("--config", config, "Flat key=value config file (env UDFP_CONFIG)");
  }

  ConfigMap resolved() const {
    return {{"assets", std::to_string(assets)}, {"days", std::to_string(days)},   {"model", model},
            {"seed", std::to_string(seed)},     {"output-dir", output_dir},       {"scenario", scenario},
            {"idio-vol", format_double(idio_vol)}, {"start-date", start_date}};
  }
};

// --- commands ----------------------------------------------------------------

inline std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw DataError(0, "cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

inline PricePanel load_filtered(const RunOptions& o, std::ostream& err) {
  const PricePanel raw = load_prices(o.prices);
  FilterResult filtered = filter_universe(raw, o.min_history, o.min_price);
  for (const auto& d : filtered.dropped) err << "dropped " << d.ticker << ": " << d.reason << '\n';
  return std::move(filtered.panel);
}

inline std::string summarize(std::span<const BacktestResult> results) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "strategy" << std::right << std::setw(16) << "terminal" << std::setw(14)
     << "growth" << std::setw(10) << "sharpe" << std::setw(10) << "max_dd" << '\n';
  for (const auto& r : results) {
    os << std::left << std::setw(10) << r.strategy << std::right << std::setw(16) << std::setprecision(6)
       << r.metrics.terminal_wealth << std::setw(14) << r.metrics.average_growth_rate << std::setw(10)
       << r.metrics.annualized_sharpe << std::setw(10) << r.metrics.max_drawdown << '\n';
  }
  return os.str();
}

inline int cmd_backtest(const RunOptions& o, std::ostream& out, std::ostream& err) {
  RunManifest manifest{"backtest", o.resolved(false), {}, {}, utc_now(), {}};
  const BacktestConfig cfg = to_backtest_config(o, factor_or_usage(o.factor));
  manifest.inputs.emplace_back(o.prices, sha256_file(o.prices));
  const PricePanel panel = load_filtered(o, err);
  const BacktestResult res = run_backtest(cfg, panel);
  const auto dir = ensure_dir(o.output_dir);
  std::span<const BacktestResult> one(&res, 1);
  std::ostringstream wealth, weights, metrics_txt;
  write_wealth_csv(one, wealth);
  write_weights_csv(res, weights);
  write_metrics(one, metrics_txt);
  write_file(dir / "wealth.csv", wealth.str());
  write_file(dir / "weights.csv", weights.str());
  write_file(dir / "metrics.txt", metrics_txt.str());
  manifest.outputs = {"wealth.csv", "weights.csv", "metrics.txt"};
  manifest.finished = utc_now();
  write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  out << summarize(one);
  return ok;
}

inline int cmd_compare(const RunOptions& o, std::ostream& out, std::ostream& err) {
  RunManifest manifest{"compare", o.resolved(true), {}, {}, utc_now(), {}};
  std::vector<FactorKind> kinds;
  std::stringstream list(o.factors);
  std::string name;
  while (std::getline(list, name, ',')) {
    if (name.empty()) continue;
    const FactorKind k = factor_or_usage(name);
    if (std::find(kinds.begin(), kinds.end(), k) != kinds.end()) {
      err << "warning: factor '" << name << "' listed more than once; ignoring the duplicate\n";
      continue;
    }
    kinds.push_back(k);
  }
  if (kinds.size() < 2) throw UsageError("compare needs at least 2 distinct factors");
  std::vector<BacktestConfig> cfgs;
  for (FactorKind k : kinds) cfgs.push_back(to_backtest_config(o, k));
  manifest.inputs.emplace_back(o.prices, sha256_file(o.prices));
  const PricePanel panel = load_filtered(o, err);
  const Comparison cmp = compare_strategies(cfgs, panel);
  const auto dir = ensure_dir(o.output_dir);
  std::ostringstream wealth, metrics_txt;
  write_wealth_csv(cmp.results, wealth);
  write_metrics(cmp.results, metrics_txt);
  write_file(dir / "wealth.csv", wealth.str());
  write_file(dir / "metrics.txt", metrics_txt.str());
  manifest.outputs = {"wealth.csv", "metrics.txt"};
  for (const auto& r : cmp.results) {
    std::ostringstream weights;
    write_weights_csv(r, weights);
    const std::string file = "weights_" + r.strategy + ".csv";
    write_file(dir / file, weights.str());
    manifest.outputs.push_back(file);
  }
  manifest.finished = utc_now();
  write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  out << summarize(cmp.results);
  return ok;
}

inline std::vector<double> parse_beta_list(const std::string& text) {
  std::vector<double> beta;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size()) {
      throw UsageError("--beta: cannot parse '" + item + "'");
    }
    beta.push_back(v);
  }
  return beta;
}

inline int cmd_verify_bounds(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  out << std::setprecision(17);
  if (!o.beta.empty()) {
    const auto beta = parse_beta_list(o.beta);
    const FnRatio fn = fn_ratio(beta, o.periods);  // rejects non-positive beta as invalid input
    const CauchySchwarz cs = cauchy_schwarz_check(beta);
    out << "fn_ratio=" << fn.value << " log_fn_ratio=" << fn.log_value << " n=" << o.periods << '\n';
    out << "cauchy_schwarz lhs=" << cs.lhs << " rhs=" << cs.rhs << " holds=" << (cs.holds ? "true" : "false") << '\n';
    const bool good = fn.value >= 1.0 - 1e-12 && cs.holds;
    out << "result=" << (good ? "ok" : "violated") << '\n';
    return good ? ok : violated;
  }

  SuiteRanges ranges;
  ranges.instances = o.instances;
  ranges.max_assets = o.max_assets;
  ranges.max_periods = o.max_periods;
  ranges.seed = o.seed;
  ranges.threads = o.threads;
  const FnSuiteReport fn = run_fn_ratio_suite(ranges);
  const IdentitySuiteReport id = run_single_factor_identity_suite(o.identity_instances, o.identity_max_assets,
                                                                   o.identity_max_periods, o.seed, o.threads);
  const BoundSuiteReport bound =
      run_two_factor_bound_suite(o.bound_instances, o.bound_max_assets, o.bound_max_periods, o.seed, o.threads);

  out << "fn_ratio instances=" << fn.instances << " min=" << fn.min_fn
      << " constant_instances=" << fn.constant_instances << " constant_max_deviation=" << fn.max_constant_deviation
      << " nonconstant_min_excess=" << fn.min_nonconstant_excess << '\n';
  out << "cauchy_schwarz failures=" << fn.cs_failures << " equality_mismatches=" << fn.cs_equality_mismatches
      << " max_relative_violation=" << fn.max_cs_violation << '\n';
  out << "single_factor_identity instances=" << id.instances << " max_residual=" << id.max_residual << '\n';
  out << "two_factor_bound instances=" << bound.instances << " min_margin=" << bound.min_margin
      << " uniform_drag_max=" << bound.max_uniform_drag << '\n';

  bool good = true;
  if (fn.instances > 0 && fn.min_fn < 1.0 - 1e-12) {
    good = false;
    err << "violation: F_n=" << fn.min_fn << " < 1 at n=" << fn.worst_n << " beta=";
    for (std::size_t j = 0; j < fn.worst_beta.size(); ++j) err << (j ? "," : "") << fn.worst_beta[j];
    err << '\n';
  }
  if (fn.max_constant_deviation > 1e-10 || fn.cs_failures > 0 || fn.cs_equality_mismatches > 0) {
    good = false;
    err << "violation: Cauchy-Schwarz / equality case failed\n";
  }
  if (id.max_residual > 1e-9) {
    good = false;
    err << "violation: single-factor identity residual " << id.max_residual << '\n';
  }
  if (bound.instances > 0 && bound.min_margin < -1e-9) {
    good = false;
    err << "violation: two-factor bound margin " << bound.min_margin << '\n';
  }
  if (bound.max_uniform_drag != 0.0) {
    good = false;
    err << "violation: drag at 1/m is " << bound.max_uniform_drag << '\n';
  }
  out << "result=" << (good ? "ok" : "violated") << '\n';
  return good ? ok : violated;
}

inline int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream&) {
  RunManifest manifest{"gen", o.resolved(), {}, {}, utc_now(), {}};
  SyntheticSpec spec;
  if (o.scenario == "tilted") {
    spec = tilted_scenario(o.seed);
  } else if (o.scenario == "none") {
    spec.assets = o.assets;
    spec.days = o.days;
    spec.seed = o.seed;
    spec.idio_vol = o.idio_vol;
    if (o.model == "single-factor") {
      spec.model = SyntheticModel::single_factor;
    } else if (o.model == "two-factor") {
      spec.model = SyntheticModel::two_factor;
    } else {
      throw UsageError("unknown --model '" + o.model + "'; allowed: single-factor|two-factor");
    }
  } else {
    throw UsageError("unknown --scenario '" + o.scenario + "'; allowed: none|tilted");
  }
  if (o.assets < 2) throw UsageError("--assets must be >= 2");
  if (o.days < 2) throw UsageError("--days must be >= 2");
  if (o.idio_vol < 0.0) throw UsageError("--idio-vol must be >= 0");
  const auto start = parse_date(o.start_date);
  if (!start) throw UsageError("--start-date expects YYYY-MM-DD");
  spec.start = *start;
  const SyntheticMarket market = gen_synthetic_panel(spec);
  const auto dir = ensure_dir(o.output_dir);
  write_file(dir / "prices.csv", to_csv(market.panel));
  manifest.outputs = {"prices.csv"};
  manifest.finished = utc_now();
  write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  out << "wrote " << (dir / "prices.csv").string() << ": " << market.panel.assets() << " tickers x "
      << market.panel.rows() << " days\n";
  return ok;
}

// --- dispatch ----------------------------------------------------------------

namespace detail {

inline std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  if (const char* env = std::getenv(kConfigEnv); env && *env) return std::string(env);
  return std::nullopt;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

inline int replay(const std::string& manifest_path, const std::string& output_dir, std::ostream& out,
                  std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError(0, "cannot open manifest '" + manifest_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(0, "manifest is not valid JSON: " + std::string(e.what()));
  }
  for (const auto& input : j.value("inputs", nlohmann::json::array())) {
    const std::string path = input.at("path");
    if (sha256_file(path) != input.at("sha256").get<std::string>()) {
      throw DataError(0, "input '" + path + "' changed since the manifest was written");
    }
  }
  std::vector<std::string> args{j.at("command").get<std::string>()};
  for (const auto& [k, v] : j.at("config").get<ConfigMap>()) {
    if (k == "output-dir" && !output_dir.empty()) continue;
    args.push_back("--" + k + "=" + v);
  }
  if (!output_dir.empty()) args.push_back("--output-dir=" + output_dir);
  return run(std::move(args), out, err);
}

/**
 * Entry point without the program name. Values from --config (or
 * UDFP_CONFIG) are injected ahead of the user's flags; every option takes
 * its last occurrence, so flags override config, which overrides defaults.
 */
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factor-tilted Dirichlet universal portfolios", "udfp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunOptions bt_opts, cmp_opts;
  VerifyOptions verify_opts;
  GenOptions gen_opts;
  std::string manifest_path, replay_dir;

  auto* bt = app.add_subcommand("backtest", "Run one factor strategy over a price panel");
  bt_opts.add_to(*bt, false);
  auto* cmp = app.add_subcommand("compare", "Run several factor strategies on the same panel");
  cmp_opts.add_to(*cmp, true);
  auto* verify = app.add_subcommand("verify-bounds", "Check F_n >= 1, Cauchy-Schwarz, growth identity and bound");
  verify_opts.add_to(*verify);
  auto* gen = app.add_subcommand("gen", "Write a synthetic factor-market price panel");
  gen_opts.add_to(*gen);
  auto* rep = app.add_subcommand("replay", "Rerun a command from its manifest.json");
  rep->add_option("--manifest", manifest_path)->required();
  rep->add_option("--output-dir", replay_dir, "Override the manifest's output directory");

  try {
    if (!args.empty() && args.front() != "replay") {
      if (auto path = detail::config_path(args)) {
        CLI::App* sub = app.get_subcommand_no_throw(args.front());
        if (sub != nullptr) {
          std::vector<std::string> injected;
          for (const auto& [key, value] : read_flat_config(*path)) {
            if (sub->get_option_no_throw("--" + key) == nullptr) {
              throw UsageError("config key '" + key + "' is not an option of '" + args.front() + "'");
            }
            if (key != "config") injected.push_back("--" + key + "=" + value);
          }
          args.insert(args.begin() + 1, injected.begin(), injected.end());
        }
      }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : usage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  }

  try {
    if (*bt) return cmd_backtest(bt_opts, out, err);
    if (*cmp) return cmd_compare(cmp_opts, out, err);
    if (*verify) return cmd_verify_bounds(verify_opts, out, err);
    if (*gen) return cmd_gen(gen_opts, out, err);
    if (*rep) return replay(manifest_path, replay_dir, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return data;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return internal;
  }
  return usage;
}

}  // namespace udfp::cli

#endif  // UDFP_CLI_HPP
