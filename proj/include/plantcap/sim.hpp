#pragma once

#include "plantcap/mcmc.hpp"
#include "plantcap/rng.hpp"
#include "plantcap/survey_data.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace plantcap {

enum class Backend { mle, bayes, bna, up };

const char* backend_name(Backend b);
Backend backend_from_name(const std::string& name);

/// Generative truth for one scenario. h/p_c hold one entry per class; the
/// weights give the deterministic plant/population allocation across classes.
struct SimTruth {
    Model model = Model::id;
    double h_total = 1500.0;
    double p_mb = 0.2; ///< p_mb for the basic design, p_mb_ni otherwise
    double p_i_c = 0.8;
    std::vector<double> p_c = {0.7};
    std::vector<double> weights = {1.0};
    std::vector<std::string> labels = {"all"};

    std::size_t n_classes() const { return p_c.size(); }
};

struct SimScenario {
    SimTruth truth;
    std::int64_t m_total = 100; ///< plants, split across classes by the weights
    std::int64_t replicates = 1000;
    Backend backend = Backend::mle;
    std::uint64_t seed = 1;
    McmcConfig mcmc; ///< settings for the bayes/up backends
    PriorSpec prior;
    int jobs = 0;
};

struct MetricRow {
    std::string param;
    double truth = 0.0;
    double estimate = 0.0; ///< mean point estimate over replicates
    double avg_sd = 0.0;   ///< mean of the per-replicate reported sds
    double emp_sd = 0.0;   ///< spread of the point estimates themselves
    double rbias = 0.0;
    double rrmse = 0.0;
    double cp = 0.0;
    double lci = 0.0;
};

struct SimReport {
    Model model = Model::id;
    Backend backend = Backend::mle;
    std::int64_t m_total = 0;
    std::int64_t replicates = 0;
    std::int64_t failures = 0;
    std::vector<MetricRow> rows;

    const MetricRow* find(const std::string& param) const;
};

/// Integer allocation of `total` across weights, largest remainder first.
std::vector<std::int64_t> largest_remainder_split(std::int64_t total,
                                                  std::span<const double> weights);

/// One synthetic survey drawn from the model's generative process.
ClassedCounts generate(const SimTruth& truth, std::int64_t m_total, Rng& rng);

/// Per-replicate fit summary of one tracked parameter.
struct ReplicateRow {
    double point = 0.0;
    double sd = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// The six report metrics for one parameter, aggregated with compensated
/// summation. The empirical sd uses the 1/n normalization, which makes
/// rrmse^2 = rbias^2 + (emp_sd/truth)^2 an identity. Estimates and interval
/// lengths average over the successful fits only; coverage counts every
/// replicate, since a replicate that produced no interval did not cover.
MetricRow aggregate_metric(const std::string& param, double truth,
                           std::span<const ReplicateRow> rows,
                           std::int64_t total_replicates);

/// Replicated generate-fit-aggregate study with the six report metrics.
/// Replicates that fail to fit are excluded and counted.
SimReport run_study(const SimScenario& scenario);

/// Scenario presets mirroring the published simulation studies:
/// table1 = basic, table2 = id, table3 = two-class; size is "small" or
/// "large". Bayesian backends default to the reduced 2x6000/3000 sampler.
SimScenario preset_scenario(const std::string& table, const std::string& size, Backend backend,
                            std::int64_t replicates, std::uint64_t seed);

SimScenario load_scenario(const std::string& path);

std::string render_sim_report_csv(const SimReport& report);

} // namespace plantcap
