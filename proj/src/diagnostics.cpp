#include "plantcap/diagnostics.hpp"

#include "plantcap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace plantcap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double var_of(std::span<const double> v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

/// Biased (1/N) autocovariance at the given lag.
double autocov(std::span<const double> v, double mean, std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < v.size(); ++i)
        s += (v[i] - mean) * (v[i + lag] - mean);
    return s / static_cast<double>(v.size());
}

} // namespace

double normal_quantile(double p) {
    // Acklam's rational approximation, |relative error| < 1.2e-9
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double quantile_type7(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return kNaN;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

PosteriorSummary summarize_draws(std::vector<double> draws) {
    PosteriorSummary s;
    if (draws.empty()) return s;
    std::sort(draws.begin(), draws.end());
    s.median = quantile_type7(draws, 0.5);
    s.q025 = quantile_type7(draws, 0.025);
    s.q975 = quantile_type7(draws, 0.975);
    const double m = mean_of(draws);
    s.sd = draws.size() > 1 ? std::sqrt(var_of(draws, m)) : 0.0;
    return s;
}

ParamDiag split_rhat_ess(const std::vector<std::span<const double>>& chains) {
    if (chains.size() < 2)
        fail(Errc::insufficient_draws, "diagnostics need at least 2 chains");
    for (const auto& c : chains)
        if (c.size() < 100)
            fail(Errc::insufficient_draws, "diagnostics need at least 100 retained draws per chain");

    // split each chain in half
    std::vector<std::span<const double>> halves;
    std::size_t n = std::numeric_limits<std::size_t>::max();
    for (const auto& c : chains) n = std::min(n, c.size() / 2);
    for (const auto& c : chains) {
        halves.emplace_back(c.data(), n);
        halves.emplace_back(c.data() + c.size() - n, n);
    }
    const std::size_t m = halves.size();
    const auto total = static_cast<double>(m * n);

    const double first = halves[0][0];
    bool constant = true;
    for (const auto& h : halves)
        for (double x : h)
            if (x != first) {
                constant = false;
                break;
            }
    if (constant) return {1.0, 0.0, true};

    // joint rank-normalization with average ranks on ties
    struct Entry {
        double value;
        std::size_t slot;
    };
    std::vector<Entry> entries;
    entries.reserve(m * static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < m; ++c)
        for (std::size_t i = 0; i < n; ++i) entries.push_back({halves[c][i], c * n + i});
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.value < b.value; });
    std::vector<double> z(entries.size());
    std::size_t i = 0;
    while (i < entries.size()) {
        std::size_t j = i;
        while (j + 1 < entries.size() && entries[j + 1].value == entries[i].value) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        const double zi = normal_quantile((avg_rank - 0.375) / (total + 0.25));
        for (std::size_t k = i; k <= j; ++k) z[entries[k].slot] = zi;
        i = j + 1;
    }

    std::vector<std::vector<double>> zc(m, std::vector<double>(n));
    for (std::size_t c = 0; c < m; ++c)
        for (std::size_t k = 0; k < n; ++k) zc[c][k] = z[c * n + k];

    std::vector<double> means(m), vars(m);
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = mean_of(zc[c]);
        vars[c] = var_of(zc[c], means[c]);
    }
    const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
    const double grand = mean_of(means);
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= static_cast<double>(n) / static_cast<double>(m - 1);

    const auto dn = static_cast<double>(n);
    const double var_plus = (dn - 1.0) / dn * w + b / dn;
    ParamDiag diag;
    diag.rhat = w > 0.0 ? std::sqrt(var_plus / w) : std::numeric_limits<double>::infinity();

    // ESS: combined autocorrelations, truncated at the first negative
    // (rho_2k, rho_2k+1) pair sum
    auto rho_at = [&](std::size_t lag) {
        double acov = 0.0;
        for (std::size_t c = 0; c < m; ++c) acov += autocov(zc[c], means[c], lag);
        acov /= static_cast<double>(m);
        return 1.0 - (w - acov) / var_plus;
    };
    double tau = 1.0; // rho_0 contribution within the first Geyer pair below
    const std::size_t max_lag = n - 1;
    double pair0 = 1.0 + rho_at(1);
    if (pair0 > 0.0) {
        double sum = pair0;
        for (std::size_t t = 2; t + 1 <= max_lag; t += 2) {
            const double pair = rho_at(t) + rho_at(t + 1);
            if (pair < 0.0) break;
            sum += pair;
        }
        tau = 2.0 * sum - 1.0;
    }
    diag.ess = total / std::max(tau, 1.0 / std::log10(total + 10.0));
    return diag;
}

} // namespace plantcap
