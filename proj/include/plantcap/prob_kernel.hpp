#pragma once

#include "plantcap/survey_data.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace plantcap {

/// Target population size plus capture/"maybe" probabilities for the
/// capture-without-identification design. h is treated as continuous inside
/// likelihoods (gamma-function binomials); rounding happens at report time.
struct BasicParams {
    double h = 0.0;
    double p_c = 0.5;
    double p_mb = 0.5;
};

struct IdParams {
    double h = 0.0;
    double p_c = 0.5;
    double p_i_c = 0.5;
    double p_mb_ni = 0.5;
};

/// Per-class population sizes and capture probabilities with shared
/// identification and "maybe" probabilities.
struct ClassParams {
    std::vector<double> h;
    std::vector<double> p_c;
    double p_i_c = 0.5;
    double p_mb_ni = 0.5;

    std::size_t n_classes() const { return h.size(); }
    double h_total() const;
};

/// Self-assessment cell probabilities: 3 cells (yes, maybe, no) for the basic
/// design, 4 cells (identified, yes, maybe, no) with identification.
struct CellProbs {
    std::array<double, 4> p{};
    std::size_t size = 0;

    double operator[](std::size_t i) const { return p[i]; }
    double sum() const;
};

CellProbs theta_basic(const BasicParams& params);
CellProbs theta_id(double p_c, double p_i_c, double p_mb_ni);
CellProbs theta_id(const IdParams& params);

/// Capture probability among the non-identified plants. Reduces to p_c when
/// p_i_c = 0, which is the capture-without-identification case.
double conditional_capture_ni(double p_c, double p_i_c);

/// Feasible integer range of the captured-"maybe" count given the observed
/// sums and a population size h. lo > hi means the data are impossible under
/// this h.
struct LatentBounds {
    std::int64_t lo = 0;
    std::int64_t hi = -1;

    bool feasible() const { return lo <= hi; }
    std::int64_t width() const { return hi - lo + 1; }
};

LatentBounds latent_bounds(const IdCounts& data, double h);

/// Interpolation of the population-expansion binomial in its size argument.
/// `exact` is the gamma-function pmf (correct normalization at integer h, the
/// density used everywhere probabilities matter). `stirling_core` drops the
/// sqrt-order Stirling terms from the coefficient, which places the
/// continuous stationary point in h exactly on the integer maximum-likelihood
/// solution; the basic-model optimizer climbs this surface so that it lands
/// on the closed-form estimators.
enum class HExpansion { exact, stirling_core };

/// Log densities. Support violations yield -infinity rather than errors so
/// optimizers and samplers can recover.
double loglik_basic(const BasicParams& params, const BasicCounts& data,
                    HExpansion expansion = HExpansion::exact);
double loglik_id(const IdParams& params, const IdCounts& data);
double loglik_class(const ClassParams& params, const ClassedCounts& data);

/// Binomial log-pmf with a real-valued size parameter (gamma functions).
double log_binom_real(double k, double n, double p);
/// Stirling-core variant (see HExpansion).
double log_binom_smooth(double k, double n, double p);
/// Integer binomial log-pmf.
double log_binom(std::int64_t k, std::int64_t n, double p);
double log_choose(std::int64_t n, std::int64_t k);

} // namespace plantcap
