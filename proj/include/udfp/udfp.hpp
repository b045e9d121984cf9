#ifndef UDFP_UDFP_HPP
#define UDFP_UDFP_HPP

// Everything except the CLI layer.
#include "udfp/backtest.hpp"
#include "udfp/error.hpp"
#include "udfp/factor_alphas.hpp"
#include "udfp/factor_markets.hpp"
#include "udfp/ingest.hpp"
#include "udfp/parallel.hpp"
#include "udfp/rng.hpp"
#include "udfp/simplex.hpp"
#include "udfp/wealth.hpp"

#endif  // UDFP_UDFP_HPP
