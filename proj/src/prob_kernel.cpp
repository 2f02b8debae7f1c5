#include "plantcap/prob_kernel.hpp"

#include "plantcap/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace plantcap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

} // namespace

double ClassParams::h_total() const { return std::accumulate(h.begin(), h.end(), 0.0); }

double CellProbs::sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size; ++i) s += p[i];
    return s;
}

CellProbs theta_basic(const BasicParams& params) {
    const double pc = params.p_c, pm = params.p_mb;
    return CellProbs{{pc * (1.0 - pm), pm, (1.0 - pc) * (1.0 - pm), 0.0}, 3};
}

CellProbs theta_id(double p_c, double p_i_c, double p_mb_ni) {
    return CellProbs{{p_c * p_i_c,
                      p_c * (1.0 - p_i_c) * (1.0 - p_mb_ni),
                      (p_c * (1.0 - p_i_c) + (1.0 - p_c)) * p_mb_ni,
                      (1.0 - p_c) * (1.0 - p_mb_ni)},
                     4};
}

CellProbs theta_id(const IdParams& params) {
    return theta_id(params.p_c, params.p_i_c, params.p_mb_ni);
}

double conditional_capture_ni(double p_c, double p_i_c) {
    const double num = p_c * (1.0 - p_i_c);
    return num / (num + (1.0 - p_c));
}

LatentBounds latent_bounds(const IdCounts& data, double h) {
    const std::int64_t base = data.y - data.m_i - data.m_yes;
    const std::int64_t hi_obs = data.h_i.value_or(0);
    // z >= base - h, with z integer and h possibly fractional
    const std::int64_t lo_h = static_cast<std::int64_t>(std::ceil(static_cast<double>(base) - h - 1e-9));
    LatentBounds b;
    b.lo = std::max<std::int64_t>(0, lo_h);
    b.hi = std::min(data.m_mb, base - hi_obs);
    return b;
}

double log_choose(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return kNegInf;
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_binom_real(double k, double n, double p) {
    if (k < -1e-9 || n - k < -1e-9) return kNegInf;
    if (p <= 0.0) return k <= 1e-9 ? 0.0 : kNegInf;
    if (p >= 1.0) return std::abs(n - k) <= 1e-9 ? 0.0 : kNegInf;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
           k * std::log(p) + (n - k) * std::log1p(-p);
}

double log_binom_smooth(double k, double n, double p) {
    if (k < -1e-9 || n - k < -1e-9) return kNegInf;
    if (p <= 0.0) return k <= 1e-9 ? 0.0 : kNegInf;
    if (p >= 1.0) return std::abs(n - k) <= 1e-9 ? 0.0 : kNegInf;
    auto core = [](double x) { return x <= 0.0 ? 0.0 : x * std::log(x) - x; };
    return core(n) - core(n - k) - std::lgamma(k + 1.0) + k * std::log(p) +
           (n - k) * std::log1p(-p);
}

double log_binom(std::int64_t k, std::int64_t n, double p) {
    if (k < 0 || k > n) return kNegInf;
    if (p <= 0.0) return k == 0 ? 0.0 : kNegInf;
    if (p >= 1.0) return k == n ? 0.0 : kNegInf;
    return log_choose(n, k) + static_cast<double>(k) * std::log(p) +
           static_cast<double>(n - k) * std::log1p(-p);
}

namespace {

/// Multinomial log-pmf; zero-probability cells are allowed when their count
/// is zero (the 0 * log 0 = 0 convention).
double log_multinom(std::initializer_list<std::int64_t> counts, const CellProbs& theta) {
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    double ll = std::lgamma(static_cast<double>(total) + 1.0);
    std::size_t j = 0;
    for (auto c : counts) {
        ll -= std::lgamma(static_cast<double>(c) + 1.0);
        if (c > 0) {
            if (theta[j] <= 0.0) return kNegInf;
            ll += static_cast<double>(c) * std::log(theta[j]);
        }
        ++j;
    }
    return ll;
}

} // namespace

double loglik_basic(const BasicParams& params, const BasicCounts& data, HExpansion expansion) {
    const double ll_m = log_multinom({data.m_yes, data.m_mb, data.m_no}, theta_basic(params));
    if (!std::isfinite(ll_m)) return kNegInf;
    // combined expansion: captured non-certain individuals out of h + m_mb
    const double k = static_cast<double>(data.y - data.m_yes);
    const double n = params.h + static_cast<double>(data.m_mb);
    const double ll_b = expansion == HExpansion::exact ? log_binom_real(k, n, params.p_c)
                                                       : log_binom_smooth(k, n, params.p_c);
    return std::isfinite(ll_b) ? ll_m + ll_b : kNegInf;
}

double loglik_id(const IdParams& params, const IdCounts& data) {
    const double ll_m =
        log_multinom({data.m_i, data.m_yes, data.m_mb, data.m_no}, theta_id(params));
    if (!std::isfinite(ll_m)) return kNegInf;

    const LatentBounds bounds = latent_bounds(data, params.h);
    if (!bounds.feasible()) return kNegInf;

    const double p_cmni = conditional_capture_ni(params.p_c, params.p_i_c);
    const std::int64_t base = data.y - data.m_i - data.m_yes;

    // log-sum-exp over the captured-"maybe" count with a running maximum
    double max_term = kNegInf;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(bounds.width()));
    for (std::int64_t z = bounds.lo; z <= bounds.hi; ++z) {
        const std::int64_t h_c = base - z;
        double t = log_binom(z, data.m_mb, p_cmni) +
                   log_binom_real(static_cast<double>(h_c), params.h, params.p_c);
        if (data.h_i) t += log_binom(*data.h_i, h_c, params.p_i_c);
        terms.push_back(t);
        if (t > max_term) max_term = t;
    }
    if (!std::isfinite(max_term)) return kNegInf;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return ll_m + max_term + std::log(acc);
}

double loglik_class(const ClassParams& params, const ClassedCounts& data) {
    if (params.n_classes() != data.n_classes())
        fail(Errc::bad_config, "parameter classes (" + std::to_string(params.n_classes()) +
                                   ") do not match data classes (" +
                                   std::to_string(data.n_classes()) + ")");
    double ll = 0.0;
    for (std::size_t k = 0; k < data.n_classes(); ++k) {
        const IdParams pk{params.h[k], params.p_c[k], params.p_i_c, params.p_mb_ni};
        ll += loglik_id(pk, data.classes[k].counts);
        if (!std::isfinite(ll)) return kNegInf;
    }
    return ll;
}

} // namespace plantcap
