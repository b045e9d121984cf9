// Dirichlet(beta) managers against Dirichlet(1) managers on simulated single-factor markets.
#include <cstdlib>
#include <iostream>

#include "udfp/udfp.hpp"

int main(int argc, char** argv) {
  const std::size_t seeds = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 50;
  const auto beta = udfp::FactorExposures::single({0.6, 0.8, 1.0, 1.2, 1.4});

  const auto one = udfp::dominance_experiment(beta, 200, 10'000, udfp::RngStream(1, 0));
  std::cout << "single market: W_beta=" << one.wealth_beta << " W_1=" << one.wealth_uniform
            << " ratio=" << one.ratio << '\n';

  const auto st = udfp::dominance_study(beta, 200, 10'000, seeds, 1);
  std::cout << seeds << " markets: mean ratio=" << st.mean << " sd=" << st.sd
            << " one-sided 95% lower bound=" << st.lower_bound << '\n';

  const auto fn = udfp::fn_ratio(beta.column(0), 200);
  std::cout << "F_200 for these betas: " << fn.value << '\n';
}
