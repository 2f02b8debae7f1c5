#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace plantcap {

enum class Model { basic, id, classed };

const char* model_name(Model m);
Model model_from_name(const std::string& name);

/// Natural-scale summary of one parameter: point estimate, standard
/// deviation, and 95% interval. Boundary estimates carry sd 0 and a point
/// interval.
struct ParamEstimate {
    std::string name;
    double estimate = 0.0;
    double sd = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool boundary = false;
};

struct FitResult {
    std::vector<ParamEstimate> params;

    /// Headline population size: total over classes for the class model.
    ParamEstimate h_total;
    double h_continuous = 0.0;
    std::int64_t h_rounded = 0;

    bool converged = true;
    bool hessian_clamped = false;
    int iterations = 0;
    double objective = 0.0; ///< log-likelihood (or log-posterior) at the mode

    const ParamEstimate* find(const std::string& name) const;
};

} // namespace plantcap
