#ifndef UDFP_FACTOR_MARKETS_HPP
#define UDFP_FACTOR_MARKETS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "udfp/error.hpp"
#include "udfp/parallel.hpp"
#include "udfp/rng.hpp"
#include "udfp/simplex.hpp"
#include "udfp/wealth.hpp"

namespace udfp {

/**
 * m x k factor loadings, k in {1, 2}.
 *
 * Single-factor loadings multiply gross returns and must be > 0. Two-factor
 * loadings are exponents of the factor gross returns and may be 0.
 */
class FactorExposures {
 public:
  static FactorExposures single(std::vector<double> beta) {
    for (double b : beta) {
      detail::require(std::isfinite(b) && b > 0.0, ErrorCode::invalid_argument, "single-factor betas must be > 0");
    }
    return FactorExposures(1, std::move(beta));
  }

  static FactorExposures two(const std::vector<double>& beta1, const std::vector<double>& beta2) {
    detail::require_same_dim(beta1.size(), beta2.size(), "FactorExposures::two");
    std::vector<double> data;
    data.reserve(2 * beta1.size());
    for (std::size_t j = 0; j < beta1.size(); ++j) {
      for (double b : {beta1[j], beta2[j]}) {
        detail::require(std::isfinite(b) && b >= 0.0, ErrorCode::invalid_argument, "two-factor betas must be >= 0");
        data.push_back(b);
      }
    }
    return FactorExposures(2, std::move(data));
  }

  std::size_t assets() const noexcept { return data_.size() / factors_; }
  std::size_t factors() const noexcept { return factors_; }
  double operator()(std::size_t asset, std::size_t factor) const { return data_[asset * factors_ + factor]; }

  std::vector<double> column(std::size_t factor) const {
    std::vector<double> out(assets());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (*this)(j, factor);
    return out;
  }

  double column_mean(std::size_t factor) const {
    double s = 0.0;
    for (std::size_t j = 0; j < assets(); ++j) s += (*this)(j, factor);
    return s / static_cast<double>(assets());
  }

 private:
  FactorExposures(std::size_t k, std::vector<double> data) : factors_(k), data_(std::move(data)) {
    detail::require(assets() >= 1, ErrorCode::invalid_argument, "need at least one asset");
  }

  std::size_t factors_;
  std::vector<double> data_;
};

/// Per-factor series of strictly positive gross returns, all of equal length.
class FactorReturnsSeries {
 public:
  explicit FactorReturnsSeries(std::vector<std::vector<double>> series) : series_(std::move(series)) {
    detail::require(!series_.empty(), ErrorCode::invalid_argument, "need at least one factor");
    for (const auto& s : series_) {
      detail::require_same_dim(series_.front().size(), s.size(), "FactorReturnsSeries");
      for (double r : s) {
        detail::require(std::isfinite(r) && r > 0.0, ErrorCode::invalid_argument, "factor returns must be > 0");
      }
    }
  }

  std::size_t factors() const noexcept { return series_.size(); }
  std::size_t periods() const noexcept { return series_.front().size(); }
  std::span<const double> factor(std::size_t k) const { return series_[k]; }

  /// Sample mean of log r for factor k (buy-and-hold growth rate).
  double growth_rate(std::size_t k) const {
    double s = 0.0;
    for (double r : series_[k]) s += std::log(r);
    return s / static_cast<double>(periods());
  }

 private:
  std::vector<std::vector<double>> series_;
};

/// n log-normal gross returns exp(drift + vol * Z).
inline std::vector<double> draw_lognormal_returns(std::size_t n, double drift, double vol, RngStream& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> out(n);
  for (double& r : out) r = std::exp(drift + vol * z(rng));
  return out;
}

/// X_i = R_m^i * beta.
inline std::vector<RelativePrice> gen_single_factor(const FactorExposures& beta, std::span<const double> market) {
  detail::require(beta.factors() == 1, ErrorCode::invalid_argument, "gen_single_factor needs k = 1 exposures");
  std::vector<RelativePrice> out;
  out.reserve(market.size());
  for (double r : market) {
    detail::require(std::isfinite(r) && r > 0.0, ErrorCode::invalid_argument, "market returns must be > 0");
    std::vector<double> x(beta.assets());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = r * beta(j, 0);
    out.emplace_back(std::move(x));
  }
  return out;
}

/// R_ji = r_1i^beta1_j * r_2i^beta2_j.
inline std::vector<RelativePrice> gen_two_factor(const FactorExposures& beta, const FactorReturnsSeries& f) {
  detail::require(beta.factors() == 2 && f.factors() == 2, ErrorCode::invalid_argument,
                  "gen_two_factor needs k = 2 exposures and two factor series");
  std::vector<RelativePrice> out;
  out.reserve(f.periods());
  for (std::size_t i = 0; i < f.periods(); ++i) {
    const double l1 = std::log(f.factor(0)[i]);
    const double l2 = std::log(f.factor(1)[i]);
    std::vector<double> x(beta.assets());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::exp(beta(j, 0) * l1 + beta(j, 1) * l2);
    out.emplace_back(std::move(x));
  }
  return out;
}

/// log(b'beta): the CRP's growth rate in excess of the market's.
inline double single_factor_excess_growth(const Portfolio& b, const FactorExposures& beta) {
  detail::require(beta.factors() == 1, ErrorCode::invalid_argument, "single_factor_excess_growth needs k = 1");
  detail::require_same_dim(b.size(), beta.assets(), "single_factor_excess_growth");
  double s = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) s += b[j] * beta(j, 0);
  if (!(s > 0.0)) throw Error(ErrorCode::non_positive_return, "b'beta <= 0");
  return std::log(s);
}

/// -log(1/(m * GM(b))) = mean_j log(m b_j); 0 at the equal-weight portfolio, -inf with any zero weight.
inline double portfolio_drag(const Portfolio& b) {
  const auto w = b.weights();
  if (std::all_of(w.begin(), w.end(), [&](double x) { return x == w.front(); })) return 0.0;
  const double m = static_cast<double>(w.size());
  double s = 0.0;
  for (double x : w) {
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    s += std::log(m * x);
  }
  return s / m;
}

/// mean(beta1) G1 + mean(beta2) G2 - log(1/(m b_GM)); -inf if b has a zero weight.
inline double two_factor_lower_bound(const FactorExposures& beta, double g1, double g2, const Portfolio& b) {
  detail::require(beta.factors() == 2, ErrorCode::invalid_argument, "two_factor_lower_bound needs k = 2");
  detail::require_same_dim(b.size(), beta.assets(), "two_factor_lower_bound");
  return beta.column_mean(0) * g1 + beta.column_mean(1) * g2 + portfolio_drag(b);
}

struct FnRatio {
  double value = 1.0;      ///< exp(log_value); +inf when it overflows
  double log_value = 0.0;  ///< n log(m sum b^2 / (sum b)^2), always finite
  bool overflow = false;
};

/**
 * F_n = m^n (sum beta^2)^n / (sum beta)^(2n), in log space.
 *
 * Uses m sum beta^2 - (sum beta)^2 = m sum (beta - mean)^2, so the log is
 * n log1p(m sum (beta - mean)^2 / (sum beta)^2) and never cancels.
 */
inline FnRatio fn_ratio(std::span<const double> beta, std::uint64_t n) {
  detail::require(beta.size() >= 2, ErrorCode::invalid_argument, "fn_ratio needs m >= 2");
  detail::require(n >= 1, ErrorCode::invalid_argument, "fn_ratio needs n >= 1");
  double sum = 0.0;
  for (double b : beta) {
    detail::require(std::isfinite(b) && b > 0.0, ErrorCode::invalid_argument, "fn_ratio needs beta > 0");
    sum += b;
  }
  const double m = static_cast<double>(beta.size());
  const double mean = sum / m;
  double ss = 0.0;
  for (double b : beta) ss += (b - mean) * (b - mean);
  FnRatio out;
  out.log_value = static_cast<double>(n) * std::log1p(m * ss / (sum * sum));
  out.value = std::exp(out.log_value);
  out.overflow = std::isinf(out.value);
  return out;
}

struct CauchySchwarz {
  double lhs = 0.0;  ///< (sum beta)^2
  double rhs = 0.0;  ///< m sum beta^2
  bool holds = true;
};

inline CauchySchwarz cauchy_schwarz_check(std::span<const double> beta) {
  double s = 0.0;
  double s2 = 0.0;
  for (double b : beta) {
    s += b;
    s2 += b * b;
  }
  CauchySchwarz cs;
  cs.lhs = s * s;
  cs.rhs = static_cast<double>(beta.size()) * s2;
  cs.holds = cs.lhs <= cs.rhs + 1e-12 * cs.rhs;
  return cs;
}

// --- Monte Carlo dominance ---------------------------------------------------

struct MarketParams {
  double drift = 0.0005;
  double vol = 0.02;
};

struct DominanceResult {
  double log_wealth_beta = 0.0;
  double log_wealth_uniform = 0.0;
  double wealth_beta = 1.0;
  double wealth_uniform = 1.0;
  double ratio = 1.0;
};

namespace detail {

inline double log_mean_exp(std::span<const double> xs) {
  const double top = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - top);
  return top + std::log(s / static_cast<double>(xs.size()));
}

inline double ensemble_log_mean_wealth(const AlphaVector& alpha, std::span<const RelativePrice> xs, std::size_t managers,
                                       const RngStream& rng) {
  std::vector<double> b(alpha.size());
  std::vector<double> lw(managers, 0.0);
  for (std::size_t k = 0; k < managers; ++k) {
    RngStream stream = rng.substream(1 + k);
    sample_dirichlet_into(alpha, stream, b);
    double l = 0.0;
    for (const auto& x : xs) l += std::log(dot(b, x.ratios()));
    lw[k] = l;
  }
  return log_mean_exp(lw);
}

}  // namespace detail

/**
 * Ensemble-average terminal wealth of Dirichlet(beta) managers against
 * Dirichlet(1, ..., 1) managers on one single-factor market. Manager k of
 * both ensembles draws from the same substream (paired seeds); the market
 * uses substream 0.
 */
inline DominanceResult dominance_experiment(const FactorExposures& beta, std::size_t periods, std::size_t managers,
                                            const RngStream& rng, MarketParams market = {}) {
  detail::require(beta.factors() == 1, ErrorCode::invalid_argument, "dominance_experiment needs k = 1");
  detail::require(managers >= 100, ErrorCode::invalid_argument, "dominance_experiment needs N >= 100");
  DominanceResult out;
  if (periods == 0) return out;
  RngStream market_stream = rng.substream(0);
  const auto r = draw_lognormal_returns(periods, market.drift, market.vol, market_stream);
  const auto xs = gen_single_factor(beta, r);
  const AlphaVector tilted(beta.column(0));
  out.log_wealth_beta = detail::ensemble_log_mean_wealth(tilted, xs, managers, rng);
  out.log_wealth_uniform = detail::ensemble_log_mean_wealth(AlphaVector::ones(beta.assets()), xs, managers, rng);
  out.wealth_beta = std::exp(out.log_wealth_beta);
  out.wealth_uniform = std::exp(out.log_wealth_uniform);
  out.ratio = std::exp(out.log_wealth_beta - out.log_wealth_uniform);
  return out;
}

struct DominanceStudy {
  std::vector<double> ratios;
  double mean = 0.0;
  double sd = 0.0;
  double lower_bound = 0.0;  ///< one-sided lower confidence bound on the mean ratio
};

/// Repeats dominance_experiment over `seeds` paired streams (seed, i) and bounds the mean ratio.
inline DominanceStudy dominance_study(const FactorExposures& beta, std::size_t periods, std::size_t managers,
                                      std::size_t seeds, std::uint64_t master_seed, double confidence = 0.95,
                                      unsigned threads = 1, MarketParams market = {}) {
  detail::require(seeds >= 2, ErrorCode::invalid_argument, "dominance_study needs at least 2 seeds");
  DominanceStudy st;
  st.ratios.resize(seeds);
  parallel_for(seeds, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      st.ratios[i] = dominance_experiment(beta, periods, managers, RngStream(master_seed, i), market).ratio;
    }
  });
  const double s = static_cast<double>(seeds);
  for (double r : st.ratios) st.mean += r;
  st.mean /= s;
  double ss = 0.0;
  for (double r : st.ratios) ss += (r - st.mean) * (r - st.mean);
  st.sd = std::sqrt(ss / (s - 1.0));
  const boost::math::students_t t(s - 1.0);
  st.lower_bound = st.mean - boost::math::quantile(t, confidence) * st.sd / std::sqrt(s);
  return st;
}

// --- randomized verification suites -----------------------------------------

struct FnSuiteReport {
  std::size_t instances = 0;
  std::size_t constant_instances = 0;
  double min_fn = std::numeric_limits<double>::infinity();
  double max_constant_deviation = 0.0;        ///< max |F_n - 1| over constant-beta instances
  double min_nonconstant_excess = std::numeric_limits<double>::infinity();  ///< min F_n - 1 elsewhere
  double max_cs_violation = -std::numeric_limits<double>::infinity();       ///< max (lhs - rhs) / rhs
  std::size_t cs_failures = 0;
  std::size_t cs_equality_mismatches = 0;
  std::vector<double> worst_beta;  ///< instance attaining min_fn
  std::uint64_t worst_n = 0;
};

struct SuiteRanges {
  std::size_t instances = 10'000;
  std::size_t max_assets = 50;
  std::size_t max_periods = 100;
  double max_beta = 10.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/**
 * Random (m, n, beta) instances for F_n and the Cauchy-Schwarz lemma. Every
 * tenth instance uses a constant beta so the equality case is exercised.
 */
inline FnSuiteReport run_fn_ratio_suite(const SuiteRanges& r) {
  struct Row {
    std::vector<double> beta;
    std::uint64_t n = 0;
    bool constant = false;
    FnRatio fn;
    CauchySchwarz cs;
  };
  std::vector<Row> rows(r.instances);
  parallel_for(r.instances, r.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(r.seed, i);
      std::uniform_int_distribution<std::size_t> m_dist(2, std::max<std::size_t>(2, r.max_assets));
      std::uniform_int_distribution<std::uint64_t> n_dist(1, std::max<std::size_t>(1, r.max_periods));
      Row& row = rows[i];
      const std::size_t m = m_dist(rng);
      row.n = n_dist(rng);
      row.constant = i % 10 == 9;
      row.beta.resize(m);
      if (row.constant) {
        std::fill(row.beta.begin(), row.beta.end(), r.max_beta * rng.uniform_open0());
      } else {
        for (double& b : row.beta) b = r.max_beta * rng.uniform_open0();
      }
      row.fn = fn_ratio(row.beta, row.n);
      row.cs = cauchy_schwarz_check(row.beta);
    }
  });
  FnSuiteReport rep;
  rep.instances = r.instances;
  for (const Row& row : rows) {
    if (row.fn.value < rep.min_fn) {
      rep.min_fn = row.fn.value;
      rep.worst_beta = row.beta;
      rep.worst_n = row.n;
    }
    const double cs_rel = (row.cs.lhs - row.cs.rhs) / row.cs.rhs;
    rep.max_cs_violation = std::max(rep.max_cs_violation, cs_rel);
    if (!row.cs.holds) ++rep.cs_failures;
    const bool cs_equal = std::abs(cs_rel) <= 1e-12;
    if (cs_equal != row.constant) ++rep.cs_equality_mismatches;
    if (row.constant) {
      ++rep.constant_instances;
      rep.max_constant_deviation = std::max(rep.max_constant_deviation, std::abs(row.fn.value - 1.0));
    } else {
      rep.min_nonconstant_excess = std::min(rep.min_nonconstant_excess, row.fn.value - 1.0);
    }
  }
  return rep;
}

struct IdentitySuiteReport {
  std::size_t instances = 0;
  double max_residual = 0.0;  ///< max |(G - G_m) - log(b'beta)|
};

/// Growth of a CRP on X = R_m * beta minus market growth against log(b'beta).
inline IdentitySuiteReport run_single_factor_identity_suite(std::size_t instances, std::size_t max_assets,
                                                            std::size_t max_periods, std::uint64_t seed,
                                                            unsigned threads = 1) {
  std::vector<double> residual(instances, 0.0);
  parallel_for(instances, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(seed, i);
      std::uniform_int_distribution<std::size_t> m_dist(2, std::max<std::size_t>(2, max_assets));
      std::uniform_int_distribution<std::size_t> n_dist(1, std::max<std::size_t>(1, max_periods));
      const std::size_t m = m_dist(rng);
      const std::size_t n = n_dist(rng);
      std::vector<double> beta(m);
      for (double& b : beta) b = 0.5 + rng.uniform_open0();
      const auto exposures = FactorExposures::single(beta);
      const auto market = draw_lognormal_returns(n, 0.0005, 0.02, rng);
      const auto xs = gen_single_factor(exposures, market);
      std::vector<double> bw(m);
      sample_dirichlet_into(AlphaVector::ones(m), rng, bw);
      const Portfolio b(bw);
      const double g = log_cumulative_wealth(b, xs) / static_cast<double>(n);
      double gm = 0.0;
      for (double r : market) gm += std::log(r);
      gm /= static_cast<double>(n);
      residual[i] = std::abs((g - gm) - single_factor_excess_growth(b, exposures));
    }
  });
  IdentitySuiteReport rep;
  rep.instances = instances;
  for (double r : residual) rep.max_residual = std::max(rep.max_residual, r);
  return rep;
}

struct BoundSuiteReport {
  std::size_t instances = 0;
  double min_margin = std::numeric_limits<double>::infinity();  ///< min GR_avg - bound
  double max_uniform_drag = 0.0;                                 ///< max |drag| at b = 1/m, m = 2..max_assets
};

/// Measured GR_avg of an interior CRP on a log-normal two-factor market against the AM-GM bound.
inline BoundSuiteReport run_two_factor_bound_suite(std::size_t instances, std::size_t max_assets,
                                                   std::size_t max_periods, std::uint64_t seed, unsigned threads = 1) {
  std::vector<double> margin(instances, 0.0);
  parallel_for(instances, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(seed, i);
      std::uniform_int_distribution<std::size_t> m_dist(2, std::max<std::size_t>(2, max_assets));
      std::uniform_int_distribution<std::size_t> n_dist(1, std::max<std::size_t>(1, max_periods));
      const std::size_t m = m_dist(rng);
      const std::size_t n = n_dist(rng);
      std::vector<double> b1(m), b2(m);
      for (double& b : b1) b = 2.0 * rng.uniform_open0();
      for (double& b : b2) b = 2.0 * rng.uniform_open0();
      const auto beta = FactorExposures::two(b1, b2);
      const double drift1 = 0.002 * (rng.uniform_open0() - 0.5);
      const double drift2 = 0.002 * (rng.uniform_open0() - 0.5);
      const FactorReturnsSeries f({draw_lognormal_returns(n, drift1, 0.02, rng),
                                   draw_lognormal_returns(n, drift2, 0.03, rng)});
      const auto xs = gen_two_factor(beta, f);
      std::vector<double> bw(m);
      sample_dirichlet_into(AlphaVector::ones(m), rng, bw);
      const Portfolio b(bw);
      margin[i] = expected_log_growth(b, xs) - two_factor_lower_bound(beta, f.growth_rate(0), f.growth_rate(1), b);
    }
  });
  BoundSuiteReport rep;
  rep.instances = instances;
  for (double x : margin) rep.min_margin = std::min(rep.min_margin, x);
  for (std::size_t m = 2; m <= std::max<std::size_t>(2, max_assets); ++m) {
    rep.max_uniform_drag = std::max(rep.max_uniform_drag, std::abs(portfolio_drag(Portfolio::uniform(m))));
  }
  return rep;
}

}  // namespace udfp

#endif  // UDFP_FACTOR_MARKETS_HPP
