#include "plantcap/priors.hpp"

#include <cmath>
#include <limits>

namespace plantcap {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;
}

double log_prior_h_continuous(double h, const PriorSpec& prior) {
    if (h < 0.5) return -std::numeric_limits<double>::infinity();
    const double lh = std::log(h);
    const double z = (lh - prior.h_log_mean) / prior.h_log_sd;
    return -0.5 * z * z - lh - std::log(prior.h_log_sd) - kLogSqrt2Pi;
}

double log_prior_h(std::int64_t h, const PriorSpec& prior) {
    return log_prior_h_continuous(static_cast<double>(h), prior);
}

double log_prior_transformed(const std::vector<double>& gamma, const ParamLayout& layout,
                             const PriorSpec& prior) {
    double lp = 0.0;
    for (std::size_t j = 0; j < layout.dim(); ++j) {
        const double g = gamma[j];
        if (layout.scales[j] == Scale::logit_prob) {
            // U(0,1) density times dp/dgamma = expit'(gamma)
            lp += -std::log1p(std::exp(-g)) - std::log1p(std::exp(g));
        } else {
            // lognormal density in h times dh/dgamma = h: normal in gamma
            const double z = (g - prior.h_log_mean) / prior.h_log_sd;
            lp += -0.5 * z * z - std::log(prior.h_log_sd) - kLogSqrt2Pi;
        }
    }
    return lp;
}

} // namespace plantcap
