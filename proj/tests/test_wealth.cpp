#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "udfp/wealth.hpp"

namespace {

using udfp::ErrorCode;
using udfp::ManagerEnsemble;
using udfp::Portfolio;
using udfp::RelativePrice;
using udfp::WealthSeries;

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const udfp::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected udfp::Error";
  return ErrorCode::data_error;
}

std::vector<RelativePrice> random_market(std::mt19937_64& gen, std::size_t n, std::size_t m) {
  std::lognormal_distribution<double> ratio(0.0, 0.1);
  std::vector<RelativePrice> xs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(m);
    for (double& v : x) v = ratio(gen);
    xs.emplace_back(x);
  }
  return xs;
}

double objective(std::span<const double> b, const std::vector<RelativePrice>& xs) {
  double f = 0.0;
  for (const auto& x : xs) {
    double r = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) r += b[j] * x[j];
    f += std::log(r);
  }
  return f;
}

// Brute force over the 0.001-resolution grid of the 3-asset simplex.
std::pair<double, std::vector<double>> grid_best(const std::vector<RelativePrice>& xs) {
  double best = -HUGE_VAL;
  std::vector<double> arg(3);
  for (int i = 0; i <= 1000; ++i) {
    for (int j = 0; i + j <= 1000; ++j) {
      const std::vector<double> b{i / 1000.0, j / 1000.0, (1000 - i - j) / 1000.0};
      const double f = objective(b, xs);
      if (f > best) {
        best = f;
        arg = b;
      }
    }
  }
  return {best, arg};
}

TEST(PeriodReturn, Examples) {
  EXPECT_DOUBLE_EQ(udfp::period_return(Portfolio({1, 0}), RelativePrice({2, 0.5})), 2.0);
  EXPECT_DOUBLE_EQ(udfp::period_return(Portfolio({0.5, 0.5}), RelativePrice({2, 0.5})), 1.25);
  EXPECT_DOUBLE_EQ(udfp::period_return(Portfolio({0.2, 0.3, 0.5}), RelativePrice({1, 1, 1})), 1.0);
  EXPECT_EQ(code_of([] { udfp::period_return(Portfolio({1, 0}), RelativePrice({1, 1, 1})); }),
            ErrorCode::dimension_mismatch);
}

TEST(CumulativeWealth, Examples) {
  const std::vector<RelativePrice> doubling{RelativePrice({2, 1}), RelativePrice({2, 1})};
  EXPECT_DOUBLE_EQ(udfp::cumulative_wealth(Portfolio({1, 0}), doubling), 4.0);
  const std::vector<RelativePrice> swing{RelativePrice({2, 0.5}), RelativePrice({0.5, 2})};
  EXPECT_NEAR(udfp::cumulative_wealth(Portfolio({0.5, 0.5}), swing), 1.5625, 1e-15);
  const std::vector<RelativePrice> flat(5, RelativePrice({1, 1}));
  EXPECT_DOUBLE_EQ(udfp::cumulative_wealth(Portfolio({0.3, 0.7}), flat), 1.0);
  EXPECT_DOUBLE_EQ(udfp::cumulative_wealth(Portfolio({0.3, 0.7}), {}), 1.0);
}

TEST(CumulativeWealth, LogEqualsSumOfLogReturns) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto xs = random_market(gen, 300, 4);
    const Portfolio b({0.1, 0.2, 0.3, 0.4});
    double direct = 0.0;
    for (const auto& x : xs) direct += std::log(udfp::period_return(b, x));
    EXPECT_NEAR(std::log(udfp::cumulative_wealth(b, xs)), direct, 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST(UpdateEnsemble, Examples) {
  ManagerEnsemble one(2);
  one.add(Portfolio({1, 0}));
  EXPECT_DOUBLE_EQ(udfp::update_ensemble(one, RelativePrice({3, 1})).wealth(0), 3.0);

  ManagerEnsemble two(2);
  two.add(Portfolio({1, 0}), 2.0);
  two.add(Portfolio({0.5, 0.5}), 5.0);
  const auto same = udfp::update_ensemble(two, RelativePrice({1, 1}));
  EXPECT_DOUBLE_EQ(same.wealth(0), 2.0);
  EXPECT_DOUBLE_EQ(same.wealth(1), 5.0);
  EXPECT_EQ(same.periods_seen(), 1u);

  ManagerEnsemble half(2);
  half.add(Portfolio({0.5, 0.5}), 2.0);
  EXPECT_NEAR(udfp::update_ensemble(half, RelativePrice({2, 0.5})).wealth(0), 2.5, 1e-15);
  EXPECT_EQ(code_of([&] { half.update(RelativePrice({1, 1, 1})); }), ErrorCode::dimension_mismatch);
}

TEST(UniversalWeights, Examples) {
  ManagerEnsemble e(2);
  e.add(Portfolio({1, 0}), 2.0);
  e.add(Portfolio({0, 1}), 1.0);
  const auto w = udfp::universal_weights(e);
  EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-15);

  ManagerEnsemble eq(3);
  eq.add(Portfolio({1, 0, 0}), 4.0);
  eq.add(Portfolio({0, 0.5, 0.5}), 4.0);
  const auto mean = udfp::universal_weights(eq);
  EXPECT_NEAR(mean[0], 0.5, 1e-15);
  EXPECT_NEAR(mean[1], 0.25, 1e-15);

  ManagerEnsemble single(2);
  single.add(Portfolio({0.3, 0.7}), 9.0);
  EXPECT_EQ(udfp::universal_weights(single), Portfolio({0.3, 0.7}));

  EXPECT_EQ(code_of([] { udfp::universal_weights(ManagerEnsemble(2)); }), ErrorCode::empty_ensemble);
}

TEST(UniversalWeights, InvariantToCommonWealthScaleAndOnSimplex) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    ManagerEnsemble a(4), b(4);
    const double scale = std::exp(50.0 * (u(gen) - 0.5));
    for (int k = 0; k < 30; ++k) {
      std::vector<double> raw(4);
      for (double& r : raw) r = u(gen);
      const auto p = udfp::normalize_to_simplex(raw);
      const double w = u(gen);
      a.add(p, w);
      b.add(p, w * scale);
    }
    const auto wa = udfp::universal_weights(a);
    const auto wb = udfp::universal_weights(b);
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(wa[j], wb[j], 1e-13);
      EXPECT_GE(wa[j], 0.0);
      sum += wa[j];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(UniversalWeights, SurvivesHugeLogWealths) {
  ManagerEnsemble e(2);
  e.add_log(std::vector<double>{1, 0}, 5000.0);
  e.add_log(std::vector<double>{0, 1}, 5000.0 + std::log(3.0));
  const auto w = udfp::universal_weights(e);
  EXPECT_NEAR(w[0], 0.25, 1e-12);
}

TEST(AverageGrowthRate, Examples) {
  EXPECT_NEAR(udfp::average_growth_rate(WealthSeries({1, 2, 4})), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(udfp::average_growth_rate(WealthSeries({1, 1, 1, 1})), 0.0);
  EXPECT_NEAR(udfp::average_growth_rate(WealthSeries({1, std::numbers::e})), 1.0, 1e-15);
  EXPECT_EQ(code_of([] { udfp::average_growth_rate(WealthSeries({1})); }), ErrorCode::series_too_short);
  EXPECT_EQ(code_of([] { WealthSeries({2, 1}); }), ErrorCode::invalid_argument);
}

TEST(ExpectedLogGrowth, Examples) {
  const std::vector<RelativePrice> twos{RelativePrice({2, 0.3}), RelativePrice({2, 7})};
  EXPECT_NEAR(udfp::expected_log_growth(Portfolio({1, 0}), twos), std::log(2.0), 1e-15);
  const std::vector<RelativePrice> ones(3, RelativePrice({1, 1}));
  EXPECT_DOUBLE_EQ(udfp::expected_log_growth(Portfolio({0.4, 0.6}), ones), 0.0);
  const std::vector<RelativePrice> swing{RelativePrice({2, 0.5}), RelativePrice({0.5, 2})};
  EXPECT_NEAR(udfp::expected_log_growth(Portfolio({0.5, 0.5}), swing), std::log(1.25), 1e-15);
  EXPECT_EQ(code_of([] { udfp::expected_log_growth(Portfolio({0.5, 0.5}), {}); }), ErrorCode::series_too_short);
}

TEST(BestCrp, DominantAssetIsAVertex) {
  const std::vector<RelativePrice> xs{RelativePrice({1.2, 1.0, 0.9}), RelativePrice({1.1, 1.05, 1.0}),
                                      RelativePrice({0.9, 0.8, 0.85})};
  const auto sol = udfp::best_crp(xs);
  EXPECT_NEAR(sol.weights[0], 1.0, 1e-9);
}

TEST(BestCrp, AlternatingMarketIsHalfHalf) {
  std::vector<RelativePrice> xs;
  for (int i = 0; i < 10; ++i) xs.emplace_back(i % 2 == 0 ? std::vector<double>{2, 0.5} : std::vector<double>{0.5, 2});
  const auto sol = udfp::best_crp(xs);
  EXPECT_NEAR(sol.weights[0], 0.5, 1e-9);
}

TEST(BestCrp, MatchesGridOracle) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 5; ++trial) {
    const auto xs = random_market(gen, 10, 3);
    const double tol = 1e-10;
    const auto sol = udfp::best_crp(xs, tol);
    const auto [grid_f, grid_b] = grid_best(xs);
    EXPECT_GE(sol.objective, grid_f - tol);
    EXPECT_LE(sol.objective - grid_f, 1e-3);  // grid resolution
    EXPECT_NEAR(sol.objective, objective(sol.weights.weights(), xs), 1e-12);
    EXPECT_LE(sol.gap, tol);
  }
}

TEST(BestCrp, ReportsBestIterateOnNonConvergence) {
  std::mt19937_64 gen(2);
  const auto xs = random_market(gen, 30, 5);
  try {
    udfp::best_crp(xs, 1e-10, 1);
    FAIL() << "expected NonConvergence";
  } catch (const udfp::NonConvergence& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_convergence);
    EXPECT_GT(e.best().objective, objective(std::vector<double>(5, 0.2), xs));
  }
}

TEST(EnsembleWealth, AverageIsMonteCarloEstimateOfUniformDirichletWealth) {
  std::mt19937_64 gen(23);
  const auto xs = random_market(gen, 40, 3);
  // Engine average vs direct product over the same samples.
  udfp::RngStream rng(4, 0);
  const auto samples = udfp::sample_dirichlet(udfp::AlphaVector::ones(3), 2000, rng);
  ManagerEnsemble e(3);
  for (const auto& p : samples) e.add(p);
  for (const auto& x : xs) e.update(x);
  double engine = 0.0, direct = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    engine += e.wealth(k);
    direct += udfp::cumulative_wealth(samples[k], xs);
  }
  EXPECT_NEAR(engine / direct, 1.0, 1e-12);

  // Doubling N leaves the expectation unchanged: 95% intervals over seeds overlap.
  auto interval = [&](std::size_t managers) {
    std::vector<double> means;
    for (std::uint64_t s = 0; s < 40; ++s) {
      udfp::RngStream r(100 + s, managers);
      ManagerEnsemble ens(3);
      for (const auto& p : udfp::sample_dirichlet(udfp::AlphaVector::ones(3), managers, r)) ens.add(p);
      for (const auto& x : xs) ens.update(x);
      double m = 0.0;
      for (std::size_t k = 0; k < ens.size(); ++k) m += ens.wealth(k);
      means.push_back(m / static_cast<double>(ens.size()));
    }
    double mu = 0.0, ss = 0.0;
    for (double v : means) mu += v;
    mu /= static_cast<double>(means.size());
    for (double v : means) ss += (v - mu) * (v - mu);
    const double half = 1.96 * std::sqrt(ss / static_cast<double>(means.size() - 1) / static_cast<double>(means.size()));
    return std::pair{mu - half, mu + half};
  };
  const auto [lo1, hi1] = interval(500);
  const auto [lo2, hi2] = interval(1000);
  EXPECT_LE(lo1, hi2);
  EXPECT_LE(lo2, hi1);
}

}  // namespace
