#pragma once

#include "plantcap/mle.hpp"
#include "plantcap/priors.hpp"

namespace plantcap {

/// Posterior normal approximation: maximizes log prior + log likelihood on
/// the transformed scale and wraps a multivariate normal around the mode via
/// the inverse negative Hessian. Natural-scale medians map the mode through
/// the inverse transforms; intervals map mode +/- 1.96 sd.
FitResult bna_fit(Model model, const ClassedCounts& data, const PriorSpec& prior = {},
                  const FitPipelineOptions& options = {});

} // namespace plantcap
