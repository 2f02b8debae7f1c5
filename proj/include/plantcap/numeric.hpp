#pragma once

#include "plantcap/optimize.hpp"
#include "plantcap/transforms.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace plantcap {

struct RichardsonOptions {
    int levels = 4;
    double init_rel_step = 1e-2;
    double reduction = 2.0;
};

/// Central-difference Hessian with Richardson extrapolation, symmetrized as
/// (H + H') / 2. Throws non_finite_evaluation when any probe point is not
/// finite; callers shrink the step or mark the coordinate as boundary.
Eigen::MatrixXd hessian_richardson(const Objective& f, const std::vector<double>& x,
                                   const RichardsonOptions& options = {});

struct Covariance {
    Eigen::MatrixXd cov;
    bool clamped = false; ///< an eigenvalue of -H fell below 1e-10 and was clamped
};

/// Inverse of the negative Hessian via symmetric eigendecomposition.
/// Near-singular information matrices are clamped and flagged, not fatal.
Covariance covariance_from_hessian(const Eigen::MatrixXd& hessian);

/// Natural-scale standard deviations from transformed-scale variances:
/// sd * exp(gamma) on log coordinates, sd * expit(g)(1-expit(g)) on logit
/// coordinates. Throws negative_variance on a negative diagonal entry.
std::vector<double> delta_method(const std::vector<double>& gamma_hat,
                                 const Eigen::MatrixXd& cov_gamma,
                                 const std::vector<Scale>& scales);

/// Natural-scale image of gamma_hat +/- 1.96 sd; endpoints stay inside the
/// natural domain by construction of the monotone back-transform.
std::pair<double, double> wald_interval(double gamma_hat, double sd_gamma, Scale scale);

struct FitPipelineOptions {
    NelderMeadOptions nm;
    RichardsonOptions richardson;
    double boundary_logit = 15.0; ///< |gamma| beyond this marks a boundary estimate
};

/// Shared maximize-then-summarize pipeline used by the MLE and the posterior
/// normal approximation: Nelder-Mead mode search with iterative detection and
/// pinning of boundary probability coordinates, Richardson Hessian on the
/// free coordinates, covariance, delta-method SDs, and Wald intervals.
FitResult maximize_and_summarize(const ParamLayout& layout, const Objective& objective,
                                 std::vector<double> gamma_start,
                                 const FitPipelineOptions& options = {});

/// Curvature summaries at a known mode. `pinned[j]` of -1/+1 holds coordinate
/// j at the lower/upper edge of its domain (reported as 0 or 1 with sd 0);
/// the Hessian is taken over the free coordinates only.
FitResult summarize_at_mode(const ParamLayout& layout, const Objective& objective,
                            std::vector<double> gamma, const std::vector<int>& pinned,
                            const FitPipelineOptions& options = {});

} // namespace plantcap
