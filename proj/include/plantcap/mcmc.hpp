#pragma once

#include "plantcap/fit_result.hpp"
#include "plantcap/priors.hpp"
#include "plantcap/survey_data.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plantcap {

struct McmcConfig {
    int chains = 3;
    int iterations = 30000; ///< per chain, burn-in included
    int burn_in = 15000;
    int thin = 1;
    std::uint64_t seed = 1;
    int adapt_window = 50; ///< proposal-scale adaptation cadence during burn-in
    int jobs = 0;          ///< parallel chains; 0 = hardware concurrency

    /// Test hook: hold every population size fixed at this value (it is then
    /// neither sampled nor given a prior).
    std::optional<std::int64_t> fixed_h;

    void check() const;
};

struct ParamDiag {
    double rhat = 1.0;
    double ess = 0.0;
    bool degenerate = false; ///< constant draws; rhat reported as 1 by convention
};

struct PosteriorSummary {
    double median = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q975 = 0.0;
};

/// Draws for one chain, post burn-in and thinning: columns[param][iter].
struct ChainDraws {
    std::vector<std::vector<double>> columns;
};

struct McmcOutput {
    std::vector<std::string> names;      ///< parameters first, then latent counts
    std::size_t n_model_params = 0;      ///< prefix of `names` that are model parameters
    std::vector<ChainDraws> chains;
    std::vector<ParamDiag> diagnostics;  ///< per name
    std::vector<PosteriorSummary> summaries;
    std::vector<double> accept_rates;    ///< per update block, averaged over chains
    bool converged_ok = true;            ///< all model-parameter split-Rhat <= 1.05

    std::size_t index_of(const std::string& name) const;
    std::vector<double> pooled(std::size_t param) const;

    /// Median / sd / central 95% interval rows for the model parameters,
    /// shaped like the other backends' fits.
    FitResult as_fit_result() const;
};

/// Metropolis-within-Gibbs over the model parameters and the discrete latent
/// counts. Probabilities move by adapted random-walk steps on the logit
/// scale; each captured-"maybe" count is refreshed by a uniform draw over its
/// feasible range with the captured-target count following from the sum
/// constraint; each population size takes an adapted integer random walk
/// against the expansion binomial and its rounded log-normal prior.
McmcOutput sample_posterior(Model model, const ClassedCounts& data, const PriorSpec& prior,
                            const McmcConfig& config);

/// Variant with the population expansion replaced by its normal
/// approximation: H is drawn per sweep from N(h0, h0 (1-p_c)/p_c) with
/// h0 = h_c / p_c, and both the drawn H and the plug-in h0 are recorded.
McmcOutput sample_posterior_up(Model model, const ClassedCounts& data, const PriorSpec& prior,
                               const McmcConfig& config);

/// One delimited file per chain: <prefix>_chain<k>.csv, header = parameter
/// names, one row per retained iteration.
void export_draws(const McmcOutput& output, const std::string& prefix);

} // namespace plantcap
