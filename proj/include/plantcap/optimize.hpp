#pragma once

#include <functional>
#include <vector>

namespace plantcap {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
    int max_iters = 0;            ///< 0 means 500 * dim
    double diameter_tol = 1e-8;   ///< simplex collapse criterion
    double fspread_tol = 1e-10;   ///< objective spread criterion
    double init_step = 0.25;      ///< initial simplex edge on each coordinate
    int restarts = 1;             ///< re-seed a fresh simplex from the incumbent
    double boundary_gamma = 15.0; ///< |coordinate| beyond this flags a boundary drift
};

struct OptimResult {
    std::vector<double> x;
    double fmax = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<bool> boundary_flags; ///< per coordinate, |x| > boundary_gamma
};

/// Maximizes the objective with the Nelder-Mead simplex. Throws
/// non_finite_start if the objective is not finite at the start point; on
/// iteration exhaustion returns the best point with converged=false.
OptimResult nelder_mead(const Objective& f, std::vector<double> start,
                        const NelderMeadOptions& options = {});

} // namespace plantcap
