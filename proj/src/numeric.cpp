#include "plantcap/numeric.hpp"

#include "plantcap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plantcap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kZ95 = 1.959963984540054;

double checked_eval(const Objective& f, const std::vector<double>& x) {
    const double v = f(x);
    if (!std::isfinite(v))
        fail(Errc::non_finite_evaluation, "objective not finite at a finite-difference probe");
    return v;
}

} // namespace

Eigen::MatrixXd hessian_richardson(const Objective& f, const std::vector<double>& x,
                                   const RichardsonOptions& options) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd hess(n, n);
    const double f_center = checked_eval(f, x);

    auto base_step = [&](Eigen::Index j) {
        return options.init_rel_step * std::max(1.0, std::abs(x[static_cast<std::size_t>(j)]));
    };

    std::vector<double> probe = x;
    auto eval_at = [&](Eigen::Index i, double di, Eigen::Index j, double dj) {
        probe = x;
        probe[static_cast<std::size_t>(i)] += di;
        probe[static_cast<std::size_t>(j)] += dj;
        return checked_eval(f, probe);
    };

    std::vector<double> tableau(static_cast<std::size_t>(options.levels));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            for (int lvl = 0; lvl < options.levels; ++lvl) {
                const double hi = base_step(i) / std::pow(options.reduction, lvl);
                const double hj = base_step(j) / std::pow(options.reduction, lvl);
                if (i == j) {
                    const double fp = eval_at(i, hi, i, 0.0);
                    const double fm = eval_at(i, -hi, i, 0.0);
                    tableau[static_cast<std::size_t>(lvl)] = (fp - 2.0 * f_center + fm) / (hi * hi);
                } else {
                    const double fpp = eval_at(i, hi, j, hj);
                    const double fpm = eval_at(i, hi, j, -hj);
                    const double fmp = eval_at(i, -hi, j, hj);
                    const double fmm = eval_at(i, -hi, j, -hj);
                    tableau[static_cast<std::size_t>(lvl)] =
                        (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
                }
            }
            // successive extrapolation of the O(h^2) error terms
            std::size_t len = tableau.size();
            for (int k = 1; k < options.levels; ++k) {
                const double fac = std::pow(options.reduction, 2.0 * k);
                for (std::size_t m = 0; m + 1 < len; ++m)
                    tableau[m] = (fac * tableau[m + 1] - tableau[m]) / (fac - 1.0);
                --len;
            }
            hess(i, j) = hess(j, i) = tableau[0];
        }
    }
    return 0.5 * (hess + hess.transpose());
}

Covariance covariance_from_hessian(const Eigen::MatrixXd& hessian) {
    const Eigen::MatrixXd info = -0.5 * (hessian + hessian.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
    Eigen::VectorXd evals = es.eigenvalues();
    Covariance out;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        if (evals[i] < 1e-10) {
            evals[i] = 1e-10;
            out.clamped = true;
        }
    }
    out.cov = es.eigenvectors() * evals.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return out;
}

std::vector<double> delta_method(const std::vector<double>& gamma_hat,
                                 const Eigen::MatrixXd& cov_gamma,
                                 const std::vector<Scale>& scales) {
    std::vector<double> sds(gamma_hat.size());
    for (std::size_t j = 0; j < gamma_hat.size(); ++j) {
        const double var = cov_gamma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        if (var < 0.0)
            fail(Errc::negative_variance,
                 "negative variance on coordinate " + std::to_string(j) +
                     "; the information matrix is not positive definite");
        const double sd_gamma = std::sqrt(var);
        if (scales[j] == Scale::log_count) {
            sds[j] = sd_gamma * std::exp(gamma_hat[j]);
        } else {
            const double e = expit(gamma_hat[j]);
            sds[j] = sd_gamma * e * (1.0 - e);
        }
    }
    return sds;
}

std::pair<double, double> wald_interval(double gamma_hat, double sd_gamma, Scale scale) {
    return {to_natural(gamma_hat - kZ95 * sd_gamma, scale),
            to_natural(gamma_hat + kZ95 * sd_gamma, scale)};
}

FitResult maximize_and_summarize(const ParamLayout& layout, const Objective& objective,
                                 std::vector<double> gamma_start,
                                 const FitPipelineOptions& options) {
    const std::size_t dim = layout.dim();
    const double pin_at = options.boundary_logit + 3.0;

    std::vector<int> pinned(dim, 0); // -1 lower boundary, +1 upper, 0 free
    std::vector<double> gamma = std::move(gamma_start);

    auto free_indices = [&] {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < dim; ++j)
            if (pinned[j] == 0) idx.push_back(j);
        return idx;
    };

    auto expand = [&](const std::vector<double>& reduced, const std::vector<std::size_t>& idx) {
        std::vector<double> full = gamma;
        for (std::size_t k = 0; k < idx.size(); ++k) full[idx[k]] = reduced[k];
        return full;
    };

    OptimResult opt;
    double fbest = kNegInf;
    int iterations = 0;
    bool converged = false;

    for (std::size_t pass = 0; pass <= dim; ++pass) {
        const auto idx = free_indices();
        if (idx.empty()) {
            fbest = objective(gamma);
            converged = true;
            break;
        }
        Objective reduced = [&](const std::vector<double>& r) { return objective(expand(r, idx)); };
        std::vector<double> start;
        for (auto j : idx) start.push_back(gamma[j]);
        opt = nelder_mead(reduced, start, options.nm);
        gamma = expand(opt.x, idx);
        fbest = opt.fmax;
        iterations += opt.iterations;
        converged = opt.converged;

        // boundary detection on the free logit coordinates: |gamma| beyond the
        // threshold, or a profile that keeps climbing out to the pinned point
        bool found = false;
        for (auto j : idx) {
            if (layout.scales[j] != Scale::logit_prob) continue;
            int dir = 0;
            if (std::abs(gamma[j]) > options.boundary_logit) {
                dir = gamma[j] > 0.0 ? 1 : -1;
            } else {
                for (int d : {1, -1}) {
                    auto probe = gamma;
                    probe[j] = d * pin_at;
                    const double fp = objective(probe);
                    if (std::isfinite(fp) && fp >= fbest - 1e-8) {
                        dir = d;
                        break;
                    }
                }
            }
            if (dir != 0) {
                pinned[j] = dir;
                gamma[j] = dir * pin_at;
                found = true;
            }
        }
        if (!found) break;
    }

    FitResult fit = summarize_at_mode(layout, objective, gamma, pinned, options);
    fit.converged = converged;
    fit.iterations = iterations;
    return fit;
}

FitResult summarize_at_mode(const ParamLayout& layout, const Objective& objective,
                            std::vector<double> gamma, const std::vector<int>& pinned,
                            const FitPipelineOptions& options) {
    const std::size_t dim = layout.dim();

    auto free_indices = [&] {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < dim; ++j)
            if (pinned[j] == 0) idx.push_back(j);
        return idx;
    };

    auto expand = [&](const std::vector<double>& reduced, const std::vector<std::size_t>& idx) {
        std::vector<double> full = gamma;
        for (std::size_t k = 0; k < idx.size(); ++k) full[idx[k]] = reduced[k];
        return full;
    };

    FitResult fit;
    fit.objective = objective(gamma);

    // Hessian over the free coordinates only; shrink steps if a probe leaves
    // the support.
    const auto idx = free_indices();
    Eigen::MatrixXd cov_free(idx.size(), idx.size());
    std::vector<double> sd_free(idx.size(), 0.0);
    if (!idx.empty()) {
        Objective reduced = [&](const std::vector<double>& r) { return objective(expand(r, idx)); };
        std::vector<double> at;
        for (auto j : idx) at.push_back(gamma[j]);

        RichardsonOptions ropt = options.richardson;
        Eigen::MatrixXd hess;
        bool ok = false;
        for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
            try {
                hess = hessian_richardson(reduced, at, ropt);
                ok = true;
            } catch (const Error& e) {
                if (e.code() != Errc::non_finite_evaluation) throw;
                ropt.init_rel_step /= 10.0;
            }
        }
        if (!ok)
            fail(Errc::optimizer_failure,
                 "cannot evaluate the Hessian near the mode; the estimate sits on the edge of "
                 "the support");

        auto cov = covariance_from_hessian(hess);
        fit.hessian_clamped = cov.clamped;
        cov_free = cov.cov;

        std::vector<double> gamma_free;
        std::vector<Scale> scales_free;
        for (auto j : idx) {
            gamma_free.push_back(gamma[j]);
            scales_free.push_back(layout.scales[j]);
        }
        sd_free = delta_method(gamma_free, cov_free, scales_free);
    }

    std::vector<double> sd_gamma_full(dim, 0.0);
    for (std::size_t k = 0; k < idx.size(); ++k)
        sd_gamma_full[idx[k]] =
            std::sqrt(std::max(0.0, cov_free(static_cast<Eigen::Index>(k),
                                             static_cast<Eigen::Index>(k))));

    fit.params.resize(dim);
    std::size_t free_pos = 0;
    for (std::size_t j = 0; j < dim; ++j) {
        ParamEstimate& pe = fit.params[j];
        pe.name = layout.names[j];
        if (pinned[j] != 0) {
            pe.boundary = true;
            pe.estimate = layout.scales[j] == Scale::logit_prob ? (pinned[j] > 0 ? 1.0 : 0.0)
                                                                : 0.0;
            pe.sd = 0.0;
            pe.ci_lo = pe.ci_hi = pe.estimate;
        } else {
            pe.estimate = to_natural(gamma[j], layout.scales[j]);
            pe.sd = sd_free[free_pos];
            auto [lo, hi] = wald_interval(gamma[j], sd_gamma_full[j], layout.scales[j]);
            pe.ci_lo = lo;
            pe.ci_hi = hi;
            ++free_pos;
        }
    }

    // headline H: the single estimate, or the across-class total with the SD
    // taken from the summed natural-scale covariance block
    if (layout.model != Model::classed) {
        fit.h_total = fit.params[layout.h_index()];
        fit.h_total.name = "H";
    } else {
        double total = 0.0, var_total = 0.0;
        for (std::size_t a = 0; a < layout.n_classes; ++a) {
            const std::size_t ja = layout.h_index(a);
            total += fit.params[ja].estimate;
            if (pinned[ja] != 0) continue;
            for (std::size_t b = 0; b < layout.n_classes; ++b) {
                const std::size_t jb = layout.h_index(b);
                if (pinned[jb] != 0) continue;
                const auto ka = static_cast<Eigen::Index>(
                    std::find(idx.begin(), idx.end(), ja) - idx.begin());
                const auto kb = static_cast<Eigen::Index>(
                    std::find(idx.begin(), idx.end(), jb) - idx.begin());
                var_total += std::exp(gamma[ja]) * std::exp(gamma[jb]) * cov_free(ka, kb);
            }
        }
        fit.h_total.name = "H";
        fit.h_total.estimate = total;
        fit.h_total.sd = std::sqrt(std::max(0.0, var_total));
        // endpoint-summed class intervals; the log-scale interval on the total
        // would understate the spread of the weakly informed classes
        fit.h_total.ci_lo = 0.0;
        fit.h_total.ci_hi = 0.0;
        for (std::size_t a = 0; a < layout.n_classes; ++a) {
            fit.h_total.ci_lo += fit.params[layout.h_index(a)].ci_lo;
            fit.h_total.ci_hi += fit.params[layout.h_index(a)].ci_hi;
        }
    }
    fit.h_continuous = fit.h_total.estimate;
    fit.h_rounded = static_cast<std::int64_t>(std::floor(fit.h_continuous));
    return fit;
}

} // namespace plantcap
