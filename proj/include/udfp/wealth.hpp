#ifndef UDFP_WEALTH_HPP
#define UDFP_WEALTH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "udfp/error.hpp"
#include "udfp/simplex.hpp"

namespace udfp {

/// Gross one-period return per asset (price_next / price_current).
class RelativePrice {
 public:
  explicit RelativePrice(std::vector<double> ratios) : ratios_(std::move(ratios)) {
    detail::require(!ratios_.empty(), ErrorCode::invalid_argument, "relative price vector is empty");
    for (double x : ratios_) {
      detail::require(std::isfinite(x) && x > 0.0, ErrorCode::invalid_argument,
                      "relative prices must be finite and > 0");
    }
  }

  std::size_t size() const noexcept { return ratios_.size(); }
  double operator[](std::size_t j) const { return ratios_[j]; }
  std::span<const double> ratios() const noexcept { return ratios_; }

  friend bool operator==(const RelativePrice&, const RelativePrice&) = default;

 private:
  std::vector<double> ratios_;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

}  // namespace detail

/// b'x.
inline double period_return(const Portfolio& b, const RelativePrice& x) {
  detail::require_same_dim(b.size(), x.size(), "period_return");
  return detail::dot(b.weights(), x.ratios());
}

/// log of the product of b'x_i; 0 for an empty sequence.
inline double log_cumulative_wealth(const Portfolio& b, std::span<const RelativePrice> xs) {
  double total = 0.0;
  for (const auto& x : xs) total += std::log(period_return(b, x));
  return total;
}

/// S_n(b, X^n) = prod_i b'x_i. An empty sequence yields 1 (empty product).
inline double cumulative_wealth(const Portfolio& b, std::span<const RelativePrice> xs) {
  return std::exp(log_cumulative_wealth(b, xs));
}

/**
 * N sampled portfolios with their cumulative wealths.
 *
 * Portfolios are stored row-major in one buffer and wealths as logarithms,
 * so horizons of thousands of periods neither overflow nor underflow.
 */
class ManagerEnsemble {
 public:
  explicit ManagerEnsemble(std::size_t dim) : dim_(dim) {
    detail::require(dim >= 2, ErrorCode::invalid_argument, "ensemble dimension must be >= 2");
  }

  void add(const Portfolio& b, double wealth = 1.0) {
    detail::require(std::isfinite(wealth) && wealth > 0.0, ErrorCode::invalid_argument,
                    "manager wealth must be finite and > 0");
    add_log(b.weights(), std::log(wealth));
  }

  /// Adds a manager whose weights are already known to lie on the simplex.
  void add_log(std::span<const double> weights, double log_wealth) {
    detail::require_same_dim(dim_, weights.size(), "ManagerEnsemble::add");
    detail::require(std::isfinite(log_wealth), ErrorCode::invalid_argument, "manager wealth must be > 0");
    weights_.insert(weights_.end(), weights.begin(), weights.end());
    log_wealth_.push_back(log_wealth);
  }

  /// Multiplies every manager's wealth by its return on x.
  void update(const RelativePrice& x) {
    detail::require_same_dim(dim_, x.size(), "update_ensemble");
    for (std::size_t k = 0; k < size(); ++k) log_wealth_[k] += std::log(detail::dot(portfolio(k), x.ratios()));
    ++periods_seen_;
  }

  std::size_t size() const noexcept { return log_wealth_.size(); }
  bool empty() const noexcept { return log_wealth_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t periods_seen() const noexcept { return periods_seen_; }

  std::span<const double> portfolio(std::size_t k) const noexcept {
    return std::span<const double>(weights_).subspan(k * dim_, dim_);
  }
  double log_wealth(std::size_t k) const noexcept { return log_wealth_[k]; }
  double wealth(std::size_t k) const noexcept { return std::exp(log_wealth_[k]); }
  std::span<const double> log_wealths() const noexcept { return log_wealth_; }

 private:
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<double> log_wealth_;
  std::size_t periods_seen_ = 0;
};

inline ManagerEnsemble update_ensemble(ManagerEnsemble e, const RelativePrice& x) {
  e.update(x);
  return e;
}

namespace detail {

// Wealth-weighted mean of row-major portfolios; weights exp(lw - max lw).
inline Portfolio wealth_weighted_mean(std::span<const double> rows, std::span<const double> log_wealth,
                                      std::size_t dim) {
  if (log_wealth.empty()) throw Error(ErrorCode::empty_ensemble, "universal_weights needs at least one manager");
  const double top = *std::max_element(log_wealth.begin(), log_wealth.end());
  std::vector<double> acc(dim, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < log_wealth.size(); ++k) {
    const double s = std::exp(log_wealth[k] - top);
    total += s;
    const double* b = rows.data() + k * dim;
    for (std::size_t j = 0; j < dim; ++j) acc[j] += s * b[j];
  }
  double sum = 0.0;
  for (double& a : acc) {
    a /= total;
    sum += a;
  }
  for (double& a : acc) a /= sum;
  return Portfolio(std::move(acc));
}

}  // namespace detail

/// w = sum_k S_k b_k / sum_k S_k, evaluated with the max log-wealth factored out.
inline Portfolio universal_weights(const ManagerEnsemble& e) {
  if (e.empty()) throw Error(ErrorCode::empty_ensemble, "universal_weights needs at least one manager");
  std::vector<double> rows;
  rows.reserve(e.size() * e.dim());
  for (std::size_t k = 0; k < e.size(); ++k) {
    auto b = e.portfolio(k);
    rows.insert(rows.end(), b.begin(), b.end());
  }
  return detail::wealth_weighted_mean(rows, e.log_wealths(), e.dim());
}

/// Time-ordered wealth path starting at exactly 1.
class WealthSeries {
 public:
  explicit WealthSeries(std::vector<double> values) : values_(std::move(values)) {
    detail::require(!values_.empty() && values_.front() == 1.0, ErrorCode::invalid_argument,
                    "wealth series must start at 1.0");
    for (double v : values_) {
      detail::require(std::isfinite(v) && v > 0.0, ErrorCode::invalid_argument, "wealth values must be > 0");
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t periods() const noexcept { return values_.empty() ? 0 : values_.size() - 1; }
  double operator[](std::size_t i) const { return values_[i]; }
  double back() const { return values_.back(); }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// (1/n) log(W_n / W_0).
inline double average_growth_rate(const WealthSeries& ws) {
  if (ws.size() < 2) throw Error(ErrorCode::series_too_short, "need at least 2 wealth values");
  return std::log(ws.back() / ws[0]) / static_cast<double>(ws.periods());
}

/// Sample mean of log(b'x) over xs.
inline double expected_log_growth(const Portfolio& b, std::span<const RelativePrice> xs) {
  if (xs.empty()) throw Error(ErrorCode::series_too_short, "expected_log_growth needs at least one period");
  double total = 0.0;
  for (const auto& x : xs) {
    const double r = period_return(b, x);
    if (!(r > 0.0)) throw Error(ErrorCode::non_positive_return, "portfolio return <= 0");
    total += std::log(r);
  }
  return total / static_cast<double>(xs.size());
}

// --- best constant-rebalanced portfolio -------------------------------------

struct CrpSolution {
  Portfolio weights;
  double objective = 0.0;  ///< sum_i log(b'x_i)
  double gap = 0.0;        ///< upper bound on optimal objective minus `objective`
  std::size_t iterations = 0;
};

/// Thrown when best_crp runs out of iterations; carries the best iterate.
class NonConvergence : public Error {
 public:
  NonConvergence(CrpSolution best, const std::string& what)
      : Error(ErrorCode::non_convergence, what), best_(std::move(best)) {}

  const CrpSolution& best() const noexcept { return best_; }

 private:
  CrpSolution best_;
};

/// Euclidean projection onto the unit simplex (sort-and-threshold).
inline std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  std::vector<double> w(v.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    w[j] = std::max(v[j] - theta, 0.0);
    sum += w[j];
  }
  for (double& x : w) x /= sum;
  return w;
}

namespace detail {

struct CrpProblem {
  std::span<const RelativePrice> xs;
  std::size_t dim;

  double objective(std::span<const double> b) const {
    double f = 0.0;
    for (const auto& x : xs) f += std::log(dot(b, x.ratios()));
    return f;
  }

  // Gradient sum_i x_i / (b'x_i) and the duality gap max_j g_j - g'b.
  double gradient(std::span<const double> b, std::vector<double>& g) const {
    std::fill(g.begin(), g.end(), 0.0);
    for (const auto& x : xs) {
      const double r = dot(b, x.ratios());
      for (std::size_t j = 0; j < dim; ++j) g[j] += x[j] / r;
    }
    return *std::max_element(g.begin(), g.end()) - dot(g, b);
  }
};

}  // namespace detail

/**
 * Maximizes sum_i log(b'x_i) over the simplex by projected gradient ascent
 * with Armijo backtracking. Stops once the duality gap max_j g_j - g'b, an
 * upper bound on the remaining objective improvement, drops to `tol`.
 */
inline CrpSolution best_crp(std::span<const RelativePrice> xs, double tol = 1e-10,
                            std::size_t max_iterations = 10'000) {
  if (xs.empty()) throw Error(ErrorCode::series_too_short, "best_crp needs at least one period");
  const std::size_t m = xs.front().size();
  for (const auto& x : xs) detail::require_same_dim(m, x.size(), "best_crp");
  detail::require(m >= 2, ErrorCode::invalid_argument, "best_crp needs at least 2 assets");

  const detail::CrpProblem problem{xs, m};
  std::vector<double> b(m, 1.0 / static_cast<double>(m));
  std::vector<double> g(m), cg(m), step(m);
  double f = problem.objective(b);
  double gap = problem.gradient(b, g);
  double eta = 1.0 / std::max(1e-300, *std::max_element(g.begin(), g.end()));
  constexpr double kArmijo = 1e-4;

  std::size_t it = 0;
  for (; it < max_iterations && gap > tol; ++it) {
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(f) + static_cast<double>(xs.size()));
    bool moved = false;
    for (int tries = 0; tries < 200; ++tries) {
      for (std::size_t j = 0; j < m; ++j) step[j] = b[j] + eta * g[j];
      std::vector<double> cand = project_to_simplex(step);
      double ascent = 0.0;
      for (std::size_t j = 0; j < m; ++j) ascent += g[j] * (cand[j] - b[j]);
      if (!(ascent > 0.0)) {
        eta *= 0.5;
        continue;
      }
      const double fc = problem.objective(cand);
      bool accept = fc >= f + kArmijo * ascent;
      double cgap = 0.0;
      if (!accept && fc >= f - noise) {
        // Objective differences are below rounding; fall back to the gap.
        cgap = problem.gradient(cand, cg);
        accept = cgap < gap;
      } else if (accept) {
        cgap = problem.gradient(cand, cg);
      }
      if (accept) {
        b = std::move(cand);
        f = fc;
        g.swap(cg);
        gap = cgap;
        eta *= 2.0;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }

  CrpSolution sol{Portfolio(b), f, gap, it};
  if (gap > tol) {
    throw NonConvergence(std::move(sol), "best_crp stopped with gap " + std::to_string(gap) + " > tol");
  }
  return sol;
}

}  // namespace udfp

#endif  // UDFP_WEALTH_HPP
