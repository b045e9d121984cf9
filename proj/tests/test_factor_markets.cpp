#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "udfp/factor_markets.hpp"

namespace {

using udfp::ErrorCode;
using udfp::FactorExposures;
using udfp::FactorReturnsSeries;
using udfp::Portfolio;
using udfp::RngStream;

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

// m^n (sum b^2)^n / (sum b)^(2n), evaluated directly in long double.
long double fn_direct(const std::vector<double>& beta, unsigned n) {
  long double s = 0.0L, s2 = 0.0L;
  for (double b : beta) {
    s += b;
    s2 += static_cast<long double>(b) * b;
  }
  const long double one = beta.size() * s2 / (s * s);
  return std::pow(one, static_cast<long double>(n));
}

TEST(GenSingleFactor, Examples) {
  const auto a = udfp::gen_single_factor(FactorExposures::single({1, 1}), std::vector<double>{1.1});
  EXPECT_EQ(a.at(0).ratios()[0], 1.1);
  EXPECT_EQ(a.at(0).ratios()[1], 1.1);

  const auto b = udfp::gen_single_factor(FactorExposures::single({0.5, 2}), std::vector<double>{1.2});
  EXPECT_NEAR(b.at(0).ratios()[0], 0.6, 1e-15);
  EXPECT_NEAR(b.at(0).ratios()[1], 2.4, 1e-15);

  const auto c = udfp::gen_single_factor(FactorExposures::single({0.3, 0.9, 1.7}), std::vector<double>(4, 1.0));
  for (const auto& x : c) EXPECT_EQ(std::vector<double>(x.ratios().begin(), x.ratios().end()),
                                    (std::vector<double>{0.3, 0.9, 1.7}));

  EXPECT_EQ(code_of([] { udfp::gen_single_factor(FactorExposures::single({1, 1}), std::vector<double>{0.0}); }),
            ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { FactorExposures::single({1, -1}); }), ErrorCode::invalid_argument);
}

TEST(GenTwoFactor, Examples) {
  const FactorReturnsSeries f({{1.1, 0.95}, {1.02, 1.3}});
  const auto unit = udfp::gen_two_factor(FactorExposures::two({1, 1}, {1, 1}), f);
  for (std::size_t i = 0; i < 2; ++i) {
    const double expected = f.factor(0)[i] * f.factor(1)[i];
    EXPECT_NEAR(unit[i].ratios()[0], expected, 1e-15);
    EXPECT_NEAR(unit[i].ratios()[1], expected, 1e-15);
  }

  const FactorReturnsSeries flat({{1, 1, 1}, {1, 1, 1}});
  for (const auto& x : udfp::gen_two_factor(FactorExposures::two({0.4, 3}, {2, 0.1}), flat)) {
    for (double r : x.ratios()) EXPECT_EQ(r, 1.0);
  }

  const FactorReturnsSeries one({{1.1}, {1.7}});
  const auto sq = udfp::gen_two_factor(FactorExposures::two({2, 2}, {0, 0}), one);
  EXPECT_NEAR(sq[0].ratios()[0], 1.21, 1e-15);

  EXPECT_EQ(code_of([] { FactorReturnsSeries({{1.0, 1.0}, {1.0}}); }), ErrorCode::dimension_mismatch);
  EXPECT_EQ(code_of([] { FactorReturnsSeries({{1.0}, {-1.0}}); }), ErrorCode::invalid_argument);
}

TEST(SingleFactorExcessGrowth, Examples) {
  const auto beta = FactorExposures::single({0.7, 1.9, 1.3});
  EXPECT_NEAR(udfp::single_factor_excess_growth(Portfolio::vertex(3, 1), beta), std::log(1.9), 1e-15);
  EXPECT_EQ(udfp::single_factor_excess_growth(Portfolio({0.2, 0.3, 0.5}), FactorExposures::single({1, 1, 1})), 0.0);
  EXPECT_NEAR(udfp::single_factor_excess_growth(Portfolio::uniform(2), FactorExposures::single({0.8, 1.2})), 0.0,
              1e-15);
  EXPECT_EQ(code_of([&] { udfp::single_factor_excess_growth(Portfolio::uniform(2), beta); }),
            ErrorCode::dimension_mismatch);
}

TEST(TwoFactorLowerBound, UniformPortfolioHasNoDrag) {
  const auto beta = FactorExposures::two({0.5, 1.0, 1.5}, {2.0, 0.0, 1.0});
  const double bound = udfp::two_factor_lower_bound(beta, 0.03, -0.01, Portfolio::uniform(3));
  EXPECT_NEAR(bound, 1.0 * 0.03 + 1.0 * -0.01, 1e-15);
  for (std::size_t m = 2; m <= 64; ++m) EXPECT_EQ(udfp::portfolio_drag(Portfolio::uniform(m)), 0.0);
}

TEST(TwoFactorLowerBound, EqualityCaseForIdenticalAssets) {
  const auto beta = FactorExposures::two({1, 1}, {0, 0});
  const Portfolio b = Portfolio::uniform(2);
  EXPECT_NEAR(udfp::two_factor_lower_bound(beta, 0.05, 0.0, b), 0.05, 1e-15);

  RngStream rng(3, 0);
  const FactorReturnsSeries f({std::vector<double>(250, std::exp(0.05)), udfp::draw_lognormal_returns(250, 0, 0.02, rng)});
  EXPECT_NEAR(f.growth_rate(0), 0.05, 1e-15);
  EXPECT_NEAR(udfp::expected_log_growth(b, udfp::gen_two_factor(beta, f)), 0.05, 1e-12);
}

TEST(TwoFactorLowerBound, ZeroWeightGivesSentinel) {
  const auto beta = FactorExposures::two({1, 2}, {1, 1});
  EXPECT_EQ(udfp::two_factor_lower_bound(beta, 0.01, 0.02, Portfolio({1, 0})),
            -std::numeric_limits<double>::infinity());
}

TEST(PortfolioDrag, MatchesGeometricMeanForm) {
  std::mt19937_64 gen(5);
  std::gamma_distribution<double> g(1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(2 + trial % 10);
    for (double& x : w) x = g(gen);
    const Portfolio b(udfp::normalize_to_simplex(w));
    long double log_gm = 0.0L;
    for (double x : b.weights()) log_gm += std::log(static_cast<long double>(x));
    log_gm /= b.size();
    const long double expected = -std::log(1.0L / (b.size() * std::exp(log_gm)));
    EXPECT_NEAR(udfp::portfolio_drag(b), static_cast<double>(expected), 1e-12);
    EXPECT_LE(udfp::portfolio_drag(b), 1e-15);
  }
}

TEST(FnRatio, Examples) {
  for (std::uint64_t n : {1ULL, 7ULL, 1000ULL}) EXPECT_EQ(udfp::fn_ratio(std::vector<double>{1, 1, 1}, n).value, 1.0);
  EXPECT_NEAR(udfp::fn_ratio(std::vector<double>{1, 2}, 1).value, 10.0 / 9.0, 1e-15);
  EXPECT_NEAR(udfp::fn_ratio(std::vector<double>{1, 2}, 3).value, std::pow(10.0 / 9.0, 3), 1e-14);
  EXPECT_EQ(code_of([] { udfp::fn_ratio(std::vector<double>{1, -2}, 1); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { udfp::fn_ratio(std::vector<double>{1}, 1); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { udfp::fn_ratio(std::vector<double>{1, 2}, 0); }), ErrorCode::invalid_argument);
}

TEST(FnRatio, OverflowKeepsLogValue) {
  const auto r = udfp::fn_ratio(std::vector<double>{1, 100}, 100000);
  EXPECT_TRUE(r.overflow);
  EXPECT_TRUE(std::isinf(r.value));
  EXPECT_NEAR(r.log_value, 100000 * std::log(2.0 * 10001.0 / (101.0 * 101.0)), 1e-9 * r.log_value);
}

TEST(FnRatio, MatchesDirectFormulaAndIsMultiplicative) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> b(1e-3, 10.0);
  std::uniform_int_distribution<int> m_dist(2, 50), n_dist(1, 100);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> beta(static_cast<std::size_t>(m_dist(gen)));
    for (double& x : beta) x = b(gen);
    const unsigned n1 = static_cast<unsigned>(n_dist(gen));
    const unsigned n2 = static_cast<unsigned>(n_dist(gen));
    const double got = udfp::fn_ratio(beta, n1).value;
    EXPECT_NEAR(got, static_cast<double>(fn_direct(beta, n1)), 1e-10 * got);
    EXPECT_GE(got, 1.0 - 1e-12);
    const double joint = udfp::fn_ratio(beta, n1 + n2).value;
    EXPECT_NEAR(joint, got * udfp::fn_ratio(beta, n2).value, 1e-10 * joint);
  }
}

TEST(CauchySchwarz, Examples) {
  const auto a = udfp::cauchy_schwarz_check(std::vector<double>{3, 4});
  EXPECT_EQ(a.lhs, 49.0);
  EXPECT_EQ(a.rhs, 50.0);
  EXPECT_TRUE(a.holds);
  const auto c = udfp::cauchy_schwarz_check(std::vector<double>{2.5, 2.5, 2.5, 2.5});
  EXPECT_EQ(c.lhs, c.rhs);
  const auto d = udfp::cauchy_schwarz_check(std::vector<double>{1, 100});
  EXPECT_EQ(d.lhs, 10201.0);
  EXPECT_EQ(d.rhs, 20002.0);
  EXPECT_TRUE(d.holds);
  const auto single = udfp::cauchy_schwarz_check(std::vector<double>{7});
  EXPECT_EQ(single.lhs, single.rhs);
}

TEST(RandomSuites, FnAndCauchySchwarz) {
  udfp::SuiteRanges r;
  r.instances = 2000;
  const auto rep = udfp::run_fn_ratio_suite(r);
  EXPECT_EQ(rep.constant_instances, 200u);
  EXPECT_GE(rep.min_fn, 1.0 - 1e-12);
  EXPECT_LE(rep.max_constant_deviation, 1e-12);
  EXPECT_GT(rep.min_nonconstant_excess, 0.0);
  EXPECT_EQ(rep.cs_failures, 0u);
  EXPECT_EQ(rep.cs_equality_mismatches, 0u);
}

TEST(RandomSuites, SingleFactorIdentity) {
  EXPECT_LE(udfp::run_single_factor_identity_suite(200, 10, 300, 4).max_residual, 1e-9);
}

TEST(RandomSuites, TwoFactorBound) {
  const auto rep = udfp::run_two_factor_bound_suite(300, 10, 200, 6);
  EXPECT_GE(rep.min_margin, -1e-9);
  EXPECT_EQ(rep.max_uniform_drag, 0.0);
}

TEST(Dominance, EmptyHorizon) {
  const auto r = udfp::dominance_experiment(FactorExposures::single({0.5, 1.5}), 0, 100, RngStream(1, 0));
  EXPECT_EQ(r.wealth_beta, 1.0);
  EXPECT_EQ(r.wealth_uniform, 1.0);
  EXPECT_EQ(r.ratio, 1.0);
}

TEST(Dominance, UnitBetasGiveUnitRatio) {
  // Same law and paired seeds: the two ensembles are the same managers.
  const auto r = udfp::dominance_experiment(FactorExposures::single({1, 1, 1, 1}), 50, 200, RngStream(2, 0));
  EXPECT_EQ(r.ratio, 1.0);
}

TEST(Dominance, RejectsSmallEnsembles) {
  EXPECT_EQ(code_of([] { udfp::dominance_experiment(FactorExposures::single({1, 2}), 5, 99, RngStream(1, 0)); }),
            ErrorCode::invalid_argument);
}

TEST(Dominance, StudyIsThreadInvariant) {
  const auto beta = FactorExposures::single({0.6, 0.8, 1.0, 1.2, 1.4});
  const auto one = udfp::dominance_study(beta, 40, 200, 8, 11, 0.95, 1);
  const auto four = udfp::dominance_study(beta, 40, 200, 8, 11, 0.95, 4);
  EXPECT_EQ(one.ratios, four.ratios);
  EXPECT_EQ(one.lower_bound, four.lower_bound);
  EXPECT_LE(one.lower_bound, one.mean);
}

}  // namespace
