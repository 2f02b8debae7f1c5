#include "plantcap/optimize.hpp"

#include "plantcap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace plantcap {

namespace {

struct Simplex {
    std::vector<std::vector<double>> x;
    std::vector<double> f;

    void sort_desc() {
        // best (largest f) first
        std::vector<std::size_t> idx(f.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
        std::vector<std::vector<double>> x2;
        std::vector<double> f2;
        for (auto i : idx) {
            x2.push_back(std::move(x[i]));
            f2.push_back(f[i]);
        }
        x = std::move(x2);
        f = std::move(f2);
    }

    double diameter() const {
        double d = 0.0;
        for (std::size_t v = 1; v < x.size(); ++v)
            for (std::size_t j = 0; j < x[0].size(); ++j)
                d = std::max(d, std::abs(x[v][j] - x[0][j]));
        return d;
    }
};

double safe_eval(const Objective& f, const std::vector<double>& x) {
    const double v = f(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
}

} // namespace

OptimResult nelder_mead(const Objective& f, std::vector<double> start,
                        const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    const double f0 = safe_eval(f, start);
    if (!std::isfinite(f0))
        fail(Errc::non_finite_start, "objective is not finite at the start point");

    const int max_iters = options.max_iters > 0 ? options.max_iters : static_cast<int>(500 * n);
    constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    OptimResult result;
    result.x = start;
    result.fmax = f0;

    int total_iters = 0;
    double step = options.init_step;
    for (int round = 0; round <= options.restarts; ++round) {
        Simplex s;
        s.x.push_back(result.x);
        s.f.push_back(result.fmax);
        for (std::size_t j = 0; j < n; ++j) {
            auto v = result.x;
            v[j] += step;
            double fv = safe_eval(f, v);
            if (!std::isfinite(fv)) {
                v[j] = result.x[j] - step;
                fv = safe_eval(f, v);
            }
            s.x.push_back(std::move(v));
            s.f.push_back(fv);
        }

        bool converged = false;
        while (total_iters < max_iters) {
            ++total_iters;
            s.sort_desc();
            const double spread = s.f.front() - s.f.back();
            if (s.diameter() < options.diameter_tol ||
                (std::isfinite(spread) && spread < options.fspread_tol)) {
                converged = true;
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t v = 0; v < n; ++v)
                for (std::size_t j = 0; j < n; ++j) centroid[j] += s.x[v][j] / static_cast<double>(n);

            auto point_at = [&](double coef) {
                std::vector<double> p(n);
                for (std::size_t j = 0; j < n; ++j)
                    p[j] = centroid[j] + coef * (centroid[j] - s.x[n][j]);
                return p;
            };

            auto xr = point_at(alpha);
            const double fr = safe_eval(f, xr);
            if (fr > s.f[0]) {
                auto xe = point_at(alpha * gamma);
                const double fe = safe_eval(f, xe);
                if (fe > fr) {
                    s.x[n] = std::move(xe);
                    s.f[n] = fe;
                } else {
                    s.x[n] = std::move(xr);
                    s.f[n] = fr;
                }
                continue;
            }
            if (fr > s.f[n - 1]) {
                s.x[n] = std::move(xr);
                s.f[n] = fr;
                continue;
            }
            auto xc = point_at(fr > s.f[n] ? rho : -rho);
            const double fc = safe_eval(f, xc);
            if (fc > std::max(fr, s.f[n])) {
                s.x[n] = std::move(xc);
                s.f[n] = fc;
                continue;
            }
            // shrink toward the best vertex
            for (std::size_t v = 1; v <= n; ++v) {
                for (std::size_t j = 0; j < n; ++j)
                    s.x[v][j] = s.x[0][j] + sigma * (s.x[v][j] - s.x[0][j]);
                s.f[v] = safe_eval(f, s.x[v]);
            }
        }

        s.sort_desc();
        if (s.f[0] >= result.fmax) {
            result.x = s.x[0];
            result.fmax = s.f[0];
        }
        result.converged = converged;
        result.iterations = total_iters;
        step = options.init_step * 0.2; // tighter simplex for the restart
        if (!converged) break;          // iteration budget exhausted
    }
    result.boundary_flags.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        result.boundary_flags[j] = std::abs(result.x[j]) > options.boundary_gamma;
    return result;
}

} // namespace plantcap
