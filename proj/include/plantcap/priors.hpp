#pragma once

#include "plantcap/transforms.hpp"

#include <cstdint>

namespace plantcap {

/// Prior specification shared by the sampler and the posterior normal
/// approximation: independent Uniform(0,1) on every probability, and an
/// integer-rounded log-normal on each population size (log-scale mean 0,
/// log-scale variance 100). The mass of the rounded variable is approximated
/// by the continuous density at the integer.
struct PriorSpec {
    double h_log_mean = 0.0;
    double h_log_sd = 10.0;
};

/// Log prior mass of an integer population size (h >= 1).
double log_prior_h(std::int64_t h, const PriorSpec& prior);

/// Same density evaluated at a continuous h, used on the optimization path.
double log_prior_h_continuous(double h, const PriorSpec& prior);

/// Log prior density of the whole transformed vector, Jacobians included:
/// a Uniform(0,1) prior contributes log[expit(g)(1-expit(g))] on a logit
/// coordinate, and the log-normal h prior becomes a normal density in log h.
double log_prior_transformed(const std::vector<double>& gamma, const ParamLayout& layout,
                             const PriorSpec& prior);

} // namespace plantcap
