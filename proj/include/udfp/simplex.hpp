#ifndef UDFP_SIMPLEX_HPP
#define UDFP_SIMPLEX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "udfp/error.hpp"
#include "udfp/rng.hpp"

namespace udfp {

inline constexpr double kSimplexTolerance = 1e-12;
inline constexpr double kClampBelow = 1e-300;

/// A point on the unit simplex: non-negative weights summing to one, m >= 2.
class Portfolio {
 public:
  explicit Portfolio(std::vector<double> weights) : weights_(std::move(weights)) { validate(); }

  static Portfolio uniform(std::size_t m) { return Portfolio(std::vector<double>(m, 1.0 / static_cast<double>(m))); }

  static Portfolio vertex(std::size_t m, std::size_t k) {
    std::vector<double> w(m, 0.0);
    detail::require(k < m, ErrorCode::invalid_portfolio, "vertex index out of range");
    w[k] = 1.0;
    return Portfolio(std::move(w));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t j) const { return weights_[j]; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::vector<double>& vector() const noexcept { return weights_; }

  friend bool operator==(const Portfolio&, const Portfolio&) = default;

 private:
  void validate() const {
    detail::require(weights_.size() >= 2, ErrorCode::invalid_portfolio, "need at least 2 assets");
    double sum = 0.0;
    for (double w : weights_) {
      detail::require(std::isfinite(w) && w >= 0.0, ErrorCode::invalid_portfolio,
                      "weights must be finite and non-negative");
      sum += w;
    }
    detail::require(std::abs(sum - 1.0) <= kSimplexTolerance, ErrorCode::invalid_portfolio,
                    "weights must sum to 1");
  }

  std::vector<double> weights_;
};

/// Strictly positive, finite Dirichlet concentration parameters.
class AlphaVector {
 public:
  explicit AlphaVector(std::vector<double> values) : values_(std::move(values)) {
    detail::require(values_.size() >= 2, ErrorCode::invalid_alpha, "need at least 2 components");
    for (double a : values_) {
      detail::require(std::isfinite(a) && a > 0.0, ErrorCode::invalid_alpha,
                      "components must be finite and > 0");
    }
  }

  static AlphaVector ones(std::size_t m) { return AlphaVector(std::vector<double>(m, 1.0)); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  double sum() const noexcept {
    double s = 0.0;
    for (double a : values_) s += a;
    return s;
  }

  /// The Dirichlet mean alpha / sum(alpha).
  Portfolio mean() const {
    const double s = sum();
    std::vector<double> w(values_.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = values_[j] / s;
    return Portfolio(std::move(w));
  }

  friend bool operator==(const AlphaVector&, const AlphaVector&) = default;

 private:
  std::vector<double> values_;
};

/// v / sum(v). Throws degenerate_vector for negative, non-finite or all-zero input.
inline Portfolio normalize_to_simplex(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) throw Error(ErrorCode::degenerate_vector, "negative or non-finite component");
    sum += x;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::degenerate_vector, "all components are zero");
  std::vector<double> w(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) w[j] = v[j] / sum;
  return Portfolio(std::move(w));
}

/**
 * Draws one Dirichlet(alpha) point into `out` (size must equal alpha.size()).
 *
 * Each Gamma(alpha_j, 1) variate is produced as a logarithm. For alpha_j < 1
 * the draw is Gamma(alpha_j + 1) * U^(1/alpha_j), whose log never underflows,
 * so arbitrarily small concentrations still normalize cleanly. Components
 * below 1e-300 after normalization are set to zero and the rest rescaled.
 */
inline void sample_dirichlet_into(const AlphaVector& alpha, RngStream& rng, std::span<double> out) {
  detail::require_same_dim(alpha.size(), out.size(), "sample_dirichlet_into");
  double max_log = -HUGE_VAL;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double a = alpha[j];
    double log_g;
    if (a >= 1.0) {
      std::gamma_distribution<double> gamma(a, 1.0);
      log_g = std::log(gamma(rng));
    } else {
      std::gamma_distribution<double> gamma(a + 1.0, 1.0);
      log_g = std::log(gamma(rng)) + std::log(rng.uniform_open0()) / a;
    }
    out[j] = log_g;
    max_log = std::max(max_log, log_g);
  }
  double sum = 0.0;
  for (double& x : out) {
    x = std::exp(x - max_log);
    sum += x;
  }
  double kept = 0.0;
  for (double& x : out) {
    x /= sum;
    if (x < kClampBelow) x = 0.0;
    kept += x;
  }
  if (kept != 1.0) {
    for (double& x : out) x /= kept;
  }
}

/// `count` independent Dirichlet(alpha) portfolios drawn from `rng`.
inline std::vector<Portfolio> sample_dirichlet(const AlphaVector& alpha, std::size_t count, RngStream& rng) {
  detail::require(count >= 1, ErrorCode::invalid_argument, "count must be >= 1");
  std::vector<Portfolio> out;
  out.reserve(count);
  std::vector<double> buf(alpha.size());
  for (std::size_t k = 0; k < count; ++k) {
    sample_dirichlet_into(alpha, rng, buf);
    out.emplace_back(buf);
  }
  return out;
}

}  // namespace udfp

#endif  // UDFP_SIMPLEX_HPP
