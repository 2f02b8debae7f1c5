#pragma once

#include "plantcap/fit_result.hpp"
#include "plantcap/numeric.hpp"
#include "plantcap/survey_data.hpp"

namespace plantcap {

/// Closed-form maximum likelihood for the capture-without-identification
/// design, with SDs and intervals from the numeric pipeline evaluated at the
/// closed-form point. Requires at least one "yes" plant and at least one
/// plant with known status.
FitResult mle_basic_closed(const BasicCounts& data);

/// Marginalized numerical MLE for any of the three designs. The data are a
/// single-class survey for basic/id. Probability estimates that run into the
/// edge of the parameter space are reported as exact 0/1 with sd 0 and a
/// boundary flag.
FitResult mle_numeric(Model model, const ClassedCounts& data,
                      const FitPipelineOptions& options = {});

/// Method-of-moments start point on the transformed scale (exposed for the
/// sampler, which uses the same initialization).
std::vector<double> moments_start(Model model, const ClassedCounts& data);

} // namespace plantcap
