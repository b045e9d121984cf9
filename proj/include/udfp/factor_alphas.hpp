#ifndef UDFP_FACTOR_ALPHAS_HPP
#define UDFP_FACTOR_ALPHAS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "udfp/error.hpp"
#include "udfp/simplex.hpp"

namespace udfp {

/// One value per asset, in universe order.
struct CrossSection {
  std::vector<double> values;
  std::vector<std::string> labels;  // optional; empty or values.size()

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t j) const { return values[j]; }
};

enum class FactorKind { uniform, size, momentum, sharpe, compound };

inline constexpr std::array<FactorKind, 5> kAllFactors = {FactorKind::uniform, FactorKind::size, FactorKind::momentum,
                                                          FactorKind::sharpe, FactorKind::compound};

inline std::string_view to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::uniform: return "uniform";
    case FactorKind::size: return "size";
    case FactorKind::momentum: return "momentum";
    case FactorKind::sharpe: return "sharpe";
    case FactorKind::compound: return "compound";
  }
  return "?";
}

inline std::optional<FactorKind> parse_factor(std::string_view name) {
  for (FactorKind k : kAllFactors) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

inline constexpr double kDegenerateSpread = 1e-12;
inline constexpr double kSharpeStdFloor = 1e-8;

namespace detail {

inline CrossSection with_values(const CrossSection& like, std::vector<double> values) {
  return CrossSection{std::move(values), like.labels};
}

}  // namespace detail

/// (v - mean) / population std; all zeros when std < 1e-12.
inline CrossSection zscore(const CrossSection& v) {
  detail::require(v.size() >= 2, ErrorCode::invalid_argument, "zscore needs at least 2 assets");
  const double m = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v.values) mean += x;
  mean /= m;
  double ss = 0.0;
  for (double x : v.values) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / m);
  std::vector<double> out(v.size(), 0.0);
  if (sd >= kDegenerateSpread) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (v[j] - mean) / sd;
  }
  return detail::with_values(v, std::move(out));
}

inline CrossSection winsorize(const CrossSection& v, double lo = -6.0, double hi = 6.0) {
  detail::require(lo < hi, ErrorCode::invalid_argument, "winsorize needs lo < hi");
  std::vector<double> out(v.values);
  for (double& x : out) x = std::clamp(x, lo, hi);
  return detail::with_values(v, std::move(out));
}

/// max(v_j, floor) componentwise.
inline CrossSection truncate_floor(const CrossSection& v, double floor = 1.0) {
  detail::require(floor > 0.0, ErrorCode::invalid_argument, "truncate_floor needs floor > 0");
  std::vector<double> out(v.values);
  for (double& x : out) x = std::max(x, floor);
  return detail::with_values(v, std::move(out));
}

/// (1/p_j) / min_k(1/p_k): the most expensive asset gets exactly 1.
inline AlphaVector size_alpha(const CrossSection& prices) {
  double top = 0.0;
  for (double p : prices.values) {
    detail::require(std::isfinite(p) && p > 0.0, ErrorCode::invalid_argument, "size_alpha needs prices > 0");
    top = std::max(top, p);
  }
  const double min_inverse = 1.0 / top;
  std::vector<double> alpha(prices.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) alpha[j] = (1.0 / prices[j]) / min_inverse;
  return AlphaVector(std::move(alpha));
}

/// truncate(exp(winsorize(zscore(r)))): within [1, e^6].
inline AlphaVector momentum_alpha(const CrossSection& cum_returns) {
  CrossSection w = winsorize(zscore(cum_returns));
  for (double& x : w.values) x = std::exp(x);
  return AlphaVector(truncate_floor(w).values);
}

struct SharpeEstimate {
  CrossSection sharpe;
  std::vector<std::size_t> insufficient;  // assets with < 2 observations, Sharpe set to 0
};

/// Bias-adjusted EWMA (decay 2/(span+1), weights renormalized over the history) at the latest point.
inline double ewma_latest(std::span<const double> xs, int span) {
  const double keep = 1.0 - 2.0 / (static_cast<double>(span) + 1.0);
  double num = 0.0;
  double den = 0.0;
  double w = 1.0;
  for (std::size_t i = xs.size(); i-- > 0;) {
    num += w * xs[i];
    den += w;
    w *= keep;
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Sample standard deviation of the last min(window, n) observations.
inline double trailing_std(std::span<const double> xs, int window) {
  const std::size_t n = std::min<std::size_t>(xs.size(), static_cast<std::size_t>(window));
  if (n < 2) return 0.0;
  auto tail = xs.subspan(xs.size() - n);
  double mean = 0.0;
  for (double x : tail) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : tail) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

/**
 * Latest EWMA(returns, span) / rolling std(returns, span) per asset.
 * The std is floored at 1e-8. Assets with fewer than two observations are
 * reported in `insufficient` and get a Sharpe of 0.
 */
inline SharpeEstimate rolling_sharpe(std::span<const std::vector<double>> returns_by_asset, int span = 10) {
  detail::require(span >= 2, ErrorCode::invalid_argument, "rolling_sharpe needs span >= 2");
  SharpeEstimate est;
  est.sharpe.values.resize(returns_by_asset.size(), 0.0);
  for (std::size_t j = 0; j < returns_by_asset.size(); ++j) {
    const auto& r = returns_by_asset[j];
    if (r.size() < 2) {
      est.insufficient.push_back(j);
      continue;
    }
    const double sd = std::max(trailing_std(r, span), kSharpeStdFloor);
    est.sharpe.values[j] = ewma_latest(r, span) / sd;
  }
  return est;
}

/// truncate(winsorize(zscore(S))): within [1, 6].
inline AlphaVector sharpe_alpha(const CrossSection& sharpes) {
  return AlphaVector(truncate_floor(winsorize(zscore(sharpes))).values);
}

/// sqrt(mom_j * sharpe_j).
inline AlphaVector compound_alpha(const AlphaVector& mom, const AlphaVector& sharpe) {
  detail::require_same_dim(mom.size(), sharpe.size(), "compound_alpha");
  std::vector<double> out(mom.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::sqrt(mom[j] * sharpe[j]);
  return AlphaVector(std::move(out));
}

/// Prices for rows 0..t (row-major, one column per asset); the last row is "now".
struct PriceHistory {
  std::span<const double> prices;
  std::size_t assets = 0;

  std::size_t rows() const noexcept { return assets == 0 ? 0 : prices.size() / assets; }
  double at(std::size_t row, std::size_t j) const { return prices[row * assets + j]; }
};

/// Number of past returns a factor needs before its alpha is defined.
inline std::size_t required_history(FactorKind kind, int span = 10) {
  switch (kind) {
    case FactorKind::uniform:
    case FactorKind::size: return 0;
    case FactorKind::momentum: return 1;
    case FactorKind::sharpe:
    case FactorKind::compound: return static_cast<std::size_t>(span);
  }
  return 0;
}

namespace detail {

inline CrossSection cumulative_returns(const PriceHistory& h) {
  const std::size_t t = h.rows() - 1;
  CrossSection r;
  r.values.resize(h.assets);
  for (std::size_t j = 0; j < h.assets; ++j) r.values[j] = h.at(t, j) / h.at(0, j) - 1.0;
  return r;
}

inline std::vector<std::vector<double>> simple_returns(const PriceHistory& h) {
  std::vector<std::vector<double>> out(h.assets);
  for (std::size_t j = 0; j < h.assets; ++j) {
    out[j].reserve(h.rows() - 1);
    for (std::size_t i = 1; i < h.rows(); ++i) out[j].push_back(h.at(i, j) / h.at(i - 1, j) - 1.0);
  }
  return out;
}

}  // namespace detail

/// Dirichlet alpha for `kind` from the price history up to and including its last row.
inline AlphaVector alpha_for(FactorKind kind, const PriceHistory& history, int span = 10) {
  detail::require(history.assets >= 2, ErrorCode::invalid_argument, "alpha_for needs at least 2 assets");
  detail::require(history.rows() >= 1, ErrorCode::insufficient_history, "alpha_for needs at least one price row");
  const std::size_t t = history.rows() - 1;
  if (t < required_history(kind, span)) {
    throw Error(ErrorCode::insufficient_history,
                std::string(to_string(kind)) + " factor needs " + std::to_string(required_history(kind, span)) +
                    " past returns, period " + std::to_string(t) + " has " + std::to_string(t));
  }
  switch (kind) {
    case FactorKind::uniform: return AlphaVector::ones(history.assets);
    case FactorKind::size: {
      CrossSection p;
      p.values.assign(history.prices.end() - static_cast<std::ptrdiff_t>(history.assets), history.prices.end());
      return size_alpha(p);
    }
    case FactorKind::momentum: return momentum_alpha(detail::cumulative_returns(history));
    case FactorKind::sharpe: return sharpe_alpha(rolling_sharpe(detail::simple_returns(history), span).sharpe);
    case FactorKind::compound:
      return compound_alpha(momentum_alpha(detail::cumulative_returns(history)),
                            sharpe_alpha(rolling_sharpe(detail::simple_returns(history), span).sharpe));
  }
  return AlphaVector::ones(history.assets);
}

}  // namespace udfp

#endif  // UDFP_FACTOR_ALPHAS_HPP
