#ifndef UDFP_BACKTEST_HPP
#define UDFP_BACKTEST_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "udfp/error.hpp"
#include "udfp/factor_alphas.hpp"
#include "udfp/factor_markets.hpp"
#include "udfp/ingest.hpp"
#include "udfp/parallel.hpp"
#include "udfp/rng.hpp"
#include "udfp/simplex.hpp"
#include "udfp/wealth.hpp"

namespace udfp {

enum class Resample { daily, weekly_median };
enum class EnsembleMode { redraw, persistent };

inline std::string_view to_string(Resample r) { return r == Resample::daily ? "daily" : "weekly-median"; }
inline std::string_view to_string(EnsembleMode e) { return e == EnsembleMode::redraw ? "redraw" : "persistent"; }

inline double periods_per_year(Resample r) { return r == Resample::daily ? 252.0 : 52.0; }

struct BacktestConfig {
  FactorKind factor = FactorKind::uniform;
  std::size_t managers = 10'000;
  std::uint64_t seed = 0;
  Resample resample = Resample::weekly_median;
  std::optional<Date> window_start;
  std::optional<Date> window_end;
  std::size_t history_filter = 4000;
  double min_price = 1.0;
  int span = 10;
  /// `persistent` samples one ensemble at the window start and carries it forward.
  EnsembleMode ensemble = EnsembleMode::redraw;
  /// Worker count; never changes results.
  unsigned threads = 1;
};

struct Metrics {
  double terminal_wealth = 1.0;
  double average_growth_rate = 0.0;
  double annualized_sharpe = 0.0;
  bool sharpe_degenerate = false;
  double max_drawdown = 0.0;
};

/// Terminal wealth, growth rate, annualized Sharpe of log returns and max drawdown.
inline Metrics metrics(const WealthSeries& ws, double periods_per_year) {
  if (ws.size() < 2) throw Error(ErrorCode::series_too_short, "metrics need at least 2 wealth values");
  Metrics m;
  m.terminal_wealth = ws.back();
  m.average_growth_rate = average_growth_rate(ws);
  const std::size_t n = ws.periods();
  std::vector<double> lr(n);
  for (std::size_t i = 0; i < n; ++i) lr[i] = std::log(ws[i + 1] / ws[i]);
  double mean = 0.0;
  for (double x : lr) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : lr) ss += (x - mean) * (x - mean);
  const double sd = n >= 2 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  if (sd < 1e-15) {
    m.sharpe_degenerate = true;
  } else {
    m.annualized_sharpe = mean / sd * std::sqrt(periods_per_year);
  }
  double peak = ws[0];
  for (double w : ws.values()) {
    peak = std::max(peak, w);
    m.max_drawdown = std::max(m.max_drawdown, 1.0 - w / peak);
  }
  return m;
}

struct BacktestResult {
  std::string strategy;
  std::vector<std::string> tickers;
  std::vector<Date> dates;            ///< wealth dates, window start .. end
  WealthSeries wealth{{1.0}};         ///< normalized to 1 at dates.front()
  std::vector<Portfolio> weights;     ///< weights[i] decided at dates[i], held over the next period
  Metrics metrics;
  std::size_t skipped_rows = 0;       ///< prepared-panel rows consumed by factor warm-up
  double periods_per_year = 52.0;
};

/// Resamples (per config) and cuts the complete-data window out of a filtered daily panel.
inline PricePanel prepare_panel(const BacktestConfig& cfg, const PricePanel& daily) {
  const PricePanel sampled = cfg.resample == Resample::weekly_median ? resample_weekly_median(daily) : daily;
  return backtest_window(sampled, cfg.window_start, cfg.window_end);
}

namespace detail {

inline std::uint64_t manager_stream(std::size_t period, std::size_t manager) {
  return hash_combine(static_cast<std::uint64_t>(period), static_cast<std::uint64_t>(manager));
}

inline void check_config(const BacktestConfig& cfg) {
  require(cfg.managers >= 1, ErrorCode::invalid_argument, "managers must be >= 1");
  require(cfg.span >= 2, ErrorCode::invalid_argument, "span must be >= 2");
  if (cfg.window_start && cfg.window_end) {
    require(*cfg.window_start < *cfg.window_end, ErrorCode::invalid_argument, "window start must precede end");
  }
}

/**
 * The per-period loop on a prepared (complete) panel, starting the clock at
 * row `start`. At each row t: alpha from prices 0..t, N fresh managers from
 * streams (seed, t, k), each scored by its CRP log-wealth over the window's
 * relative prices up to t, then w = wealth-weighted mean, traded on X_{t+1}.
 */
inline BacktestResult run_from(const BacktestConfig& cfg, const PricePanel& panel, std::size_t start) {
  check_config(cfg);
  const std::size_t m = panel.assets();
  require(m >= 2, ErrorCode::invalid_argument, "backtest needs at least 2 assets");
  if (panel.rows() < start + 2) {
    throw Error(ErrorCode::insufficient_history,
                "need at least 2 price rows after a warm-up of " + std::to_string(start) + " rows, panel has " +
                    std::to_string(panel.rows()));
  }
  const auto xs = to_relative_prices(panel);  // xs[t-1] = X_t
  const std::size_t last = panel.rows() - 1;
  const std::size_t n = cfg.managers;

  std::vector<double> rows(n * m);
  std::vector<double> lw(n, 0.0);
  BacktestResult res;
  res.strategy = std::string(to_string(cfg.factor));
  res.tickers = panel.tickers();
  res.skipped_rows = start;
  res.periods_per_year = periods_per_year(cfg.resample);
  std::vector<double> wealth{1.0};
  double log_wealth = 0.0;

  for (std::size_t t = start; t <= last; ++t) {
    const bool draw = cfg.ensemble == EnsembleMode::redraw || t == start;
    if (draw) {
      const PriceHistory history{panel.matrix().first((t + 1) * m), m};
      const AlphaVector alpha = alpha_for(cfg.factor, history, cfg.span);
      parallel_for(n, cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          RngStream rng(cfg.seed, manager_stream(t, k));
          std::span<double> b(rows.data() + k * m, m);
          sample_dirichlet_into(alpha, rng, b);
          double l = 0.0;
          for (std::size_t i = start + 1; i <= t; ++i) l += std::log(dot(b, xs[i - 1].ratios()));
          lw[k] = l;
        }
      });
    }
    Portfolio w = wealth_weighted_mean(rows, lw, m);
    res.dates.push_back(panel.date(t));
    if (t < last) {
      const RelativePrice& next = xs[t];
      log_wealth += std::log(period_return(w, next));
      wealth.push_back(std::exp(log_wealth));
      if (cfg.ensemble == EnsembleMode::persistent) {
        parallel_for(n, cfg.threads, [&](std::size_t begin, std::size_t end) {
          for (std::size_t k = begin; k < end; ++k) lw[k] += std::log(dot({rows.data() + k * m, m}, next.ratios()));
        });
      }
    }
    res.weights.push_back(std::move(w));
  }
  res.wealth = WealthSeries(std::move(wealth));
  res.metrics = metrics(res.wealth, res.periods_per_year);
  return res;
}

}  // namespace detail

/// Backtest of one factor on a filtered daily panel.
inline BacktestResult run_backtest(const BacktestConfig& cfg, const PricePanel& panel) {
  const PricePanel prepared = prepare_panel(cfg, panel);
  return detail::run_from(cfg, prepared, required_history(cfg.factor, cfg.span));
}

struct Comparison {
  std::vector<BacktestResult> results;
  std::size_t skipped_rows = 0;
};

/// Runs every config on the same prepared panel with a shared warm-up so wealth series align.
inline Comparison compare_strategies(std::span<const BacktestConfig> cfgs, const PricePanel& panel) {
  if (cfgs.empty()) throw Error(ErrorCode::invalid_argument, "compare_strategies needs at least one config");
  const BacktestConfig& ref = cfgs.front();
  std::size_t start = 0;
  for (const auto& c : cfgs) {
    const bool same = c.resample == ref.resample && c.window_start == ref.window_start &&
                      c.window_end == ref.window_end && c.history_filter == ref.history_filter &&
                      c.min_price == ref.min_price;
    detail::require(same, ErrorCode::invalid_argument, "configs disagree on resample/window/filter settings");
    start = std::max(start, required_history(c.factor, c.span));
  }
  const PricePanel prepared = prepare_panel(ref, panel);
  Comparison out;
  out.skipped_rows = start;
  for (const auto& c : cfgs) out.results.push_back(detail::run_from(c, prepared, start));
  return out;
}

// --- synthetic panels --------------------------------------------------------

enum class SyntheticModel { single_factor, two_factor };

struct SyntheticSpec {
  std::size_t assets = 20;
  std::size_t days = 4200;
  SyntheticModel model = SyntheticModel::single_factor;
  /// Defaults to a spread of loadings around 1 when empty.
  std::optional<FactorExposures> beta;
  MarketParams factor1{0.0003, 0.012};
  MarketParams factor2{0.0, 0.008};
  double idio_vol = 0.0;
  /// Defaults to 100 for every asset when empty.
  std::vector<double> initial_prices;
  Date start = Date(std::chrono::year{2007} / std::chrono::August / 1);
  std::uint64_t seed = 1;
  /// Paths whose minimum falls below this are scaled up to it (relative prices unchanged).
  double min_price_floor = 1.0;
};

struct SyntheticMarket {
  PricePanel panel;
  std::vector<RelativePrice> gross_returns;  ///< returns[i] moves row i to row i+1
  FactorExposures beta = FactorExposures::single({1.0});
};

inline FactorExposures default_exposures(SyntheticModel model, std::size_t m) {
  std::vector<double> b1(m), b2(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double u = m > 1 ? static_cast<double>(j) / static_cast<double>(m - 1) : 0.5;
    b1[j] = model == SyntheticModel::single_factor ? std::exp(0.0008 * (u - 0.5)) : 0.5 + u;
    b2[j] = 1.5 - u;
  }
  return model == SyntheticModel::single_factor ? FactorExposures::single(b1) : FactorExposures::two(b1, b2);
}

inline std::vector<Date> business_days(Date start, std::size_t count) {
  std::vector<Date> out;
  out.reserve(count);
  for (Date d = start; out.size() < count; d += std::chrono::days(1)) {
    const unsigned wd = std::chrono::weekday(d).iso_encoding();
    if (wd <= 5) out.push_back(d);
  }
  return out;
}

/// Daily business-day panel integrated from single- or two-factor gross returns.
inline SyntheticMarket gen_synthetic_panel(const SyntheticSpec& spec) {
  detail::require(spec.assets >= 2, ErrorCode::invalid_argument, "synthetic panel needs >= 2 assets");
  detail::require(spec.days >= 2, ErrorCode::invalid_argument, "synthetic panel needs >= 2 days");
  detail::require(spec.idio_vol >= 0.0, ErrorCode::invalid_argument, "idiosyncratic vol must be >= 0");
  const std::size_t m = spec.assets;
  const std::size_t n = spec.days - 1;
  FactorExposures beta = spec.beta ? *spec.beta : default_exposures(spec.model, m);
  detail::require_same_dim(beta.assets(), m, "gen_synthetic_panel betas");
  const std::size_t want_k = spec.model == SyntheticModel::single_factor ? 1 : 2;
  detail::require(beta.factors() == want_k, ErrorCode::invalid_argument, "betas do not match the factor model");
  std::vector<double> p0 = spec.initial_prices.empty() ? std::vector<double>(m, 100.0) : spec.initial_prices;
  detail::require_same_dim(p0.size(), m, "gen_synthetic_panel initial prices");
  for (double p : p0) detail::require(std::isfinite(p) && p > 0.0, ErrorCode::invalid_argument, "initial prices must be > 0");

  RngStream factor_rng(spec.seed, 0);
  std::vector<RelativePrice> xs;
  if (spec.model == SyntheticModel::single_factor) {
    xs = gen_single_factor(beta, draw_lognormal_returns(n, spec.factor1.drift, spec.factor1.vol, factor_rng));
  } else {
    auto r1 = draw_lognormal_returns(n, spec.factor1.drift, spec.factor1.vol, factor_rng);
    auto r2 = draw_lognormal_returns(n, spec.factor2.drift, spec.factor2.vol, factor_rng);
    xs = gen_two_factor(beta, FactorReturnsSeries({std::move(r1), std::move(r2)}));
  }
  if (spec.idio_vol > 0.0) {
    RngStream idio_rng(spec.seed, 1);
    std::normal_distribution<double> z(0.0, 1.0);
    for (auto& x : xs) {
      std::vector<double> v(x.ratios().begin(), x.ratios().end());
      for (double& r : v) r *= std::exp(spec.idio_vol * z(idio_rng));
      x = RelativePrice(std::move(v));
    }
  }

  std::vector<double> prices(spec.days * m);
  for (std::size_t j = 0; j < m; ++j) {
    prices[j] = p0[j];
    double lowest = p0[j];
    for (std::size_t i = 1; i < spec.days; ++i) {
      prices[i * m + j] = prices[(i - 1) * m + j] * xs[i - 1][j];
      lowest = std::min(lowest, prices[i * m + j]);
    }
    if (lowest < spec.min_price_floor) {
      const double lift = spec.min_price_floor / lowest;
      for (std::size_t i = 0; i < spec.days; ++i) {
        prices[i * m + j] *= lift;
        if (prices[i * m + j] < spec.min_price_floor) prices[i * m + j] = spec.min_price_floor;
      }
    }
  }
  std::vector<std::string> tickers(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::string num = std::to_string(j + 1);
    tickers[j] = "SYN" + std::string(num.size() < 3 ? 3 - num.size() : 0, '0') + num;
  }
  return SyntheticMarket{PricePanel(business_days(spec.start, spec.days), std::move(tickers), std::move(prices)),
                         std::move(xs), std::move(beta)};
}

/**
 * Seeded single-factor scenario where the cheapest assets carry the
 * highest loadings and therefore the strongest momentum. Prices are spread
 * widely enough that the size ranking never flips over the horizon.
 */
inline SyntheticSpec tilted_scenario(std::uint64_t seed = 20230606) {
  SyntheticSpec spec;
  spec.assets = 10;
  spec.days = 1500;
  spec.seed = seed;
  spec.idio_vol = 0.01;
  std::vector<double> beta(spec.assets);
  spec.initial_prices.resize(spec.assets);
  for (std::size_t j = 0; j < spec.assets; ++j) {
    const double u = static_cast<double>(j) / static_cast<double>(spec.assets - 1);
    beta[j] = std::exp(0.0006 * (u - 0.5));
    spec.initial_prices[j] = 800.0 * std::pow(0.55, static_cast<double>(j));
  }
  spec.beta = FactorExposures::single(beta);
  return spec;
}

// --- report writers ----------------------------------------------------------

/// `date,<strategy...>`, wealth normalized to 1 at the window start.
inline void write_wealth_csv(std::span<const BacktestResult> results, std::ostream& out) {
  out << "date";
  for (const auto& r : results) out << ',' << r.strategy;
  out << '\n';
  if (results.empty()) return;
  for (std::size_t i = 0; i < results.front().dates.size(); ++i) {
    out << format_date(results.front().dates[i]);
    for (const auto& r : results) out << ',' << format_double(r.wealth[i]);
    out << '\n';
  }
}

/// `date,ticker,weight` for every decision date.
inline void write_weights_csv(const BacktestResult& r, std::ostream& out) {
  out << "date,ticker,weight\n";
  for (std::size_t i = 0; i < r.weights.size(); ++i) {
    const std::string d = format_date(r.dates[i]);
    for (std::size_t j = 0; j < r.tickers.size(); ++j) {
      out << d << ',' << r.tickers[j] << ',' << format_double(r.weights[i][j]) << '\n';
    }
  }
}

/// Flat `key=value` metrics, one block per strategy.
inline void write_metrics(std::span<const BacktestResult> results, std::ostream& out) {
  if (results.empty()) return;
  const auto& first = results.front();
  out << "periods=" << first.wealth.periods() << '\n';
  out << "start_date=" << format_date(first.dates.front()) << '\n';
  out << "end_date=" << format_date(first.dates.back()) << '\n';
  out << "warmup_rows=" << first.skipped_rows << '\n';
  out << "strategies=";
  for (std::size_t i = 0; i < results.size(); ++i) out << (i ? "," : "") << results[i].strategy;
  out << '\n';
  for (const auto& r : results) {
    const std::string p = r.strategy + ".";
    out << p << "terminal_wealth=" << format_double(r.metrics.terminal_wealth) << '\n';
    out << p << "average_growth_rate=" << format_double(r.metrics.average_growth_rate) << '\n';
    out << p << "annualized_sharpe=" << format_double(r.metrics.annualized_sharpe) << '\n';
    out << p << "sharpe_degenerate=" << (r.metrics.sharpe_degenerate ? "true" : "false") << '\n';
    out << p << "max_drawdown=" << format_double(r.metrics.max_drawdown) << '\n';
  }
}

}  // namespace udfp

#endif  // UDFP_BACKTEST_HPP
