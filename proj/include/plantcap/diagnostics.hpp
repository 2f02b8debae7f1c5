#pragma once

#include "plantcap/mcmc.hpp"

#include <span>
#include <vector>

namespace plantcap {

/// Split, rank-normalized potential-scale-reduction and effective sample
/// size. Each input chain is halved; draws are rank-normalized jointly; the
/// autocorrelation sum is truncated at the first negative Geyer pair.
/// Identical constant chains report rhat 1 with the degenerate flag; fewer
/// than 2 chains or fewer than 100 retained draws per chain is an error.
ParamDiag split_rhat_ess(const std::vector<std::span<const double>>& chains);

/// Median, sd and central 95% interval of pooled draws.
PosteriorSummary summarize_draws(std::vector<double> draws);

/// Sample quantile with linear interpolation (the numpy/R type-7 rule).
double quantile_type7(const std::vector<double>& sorted, double q);

/// Standard normal quantile function.
double normal_quantile(double p);

} // namespace plantcap
