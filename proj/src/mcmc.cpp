#include "plantcap/mcmc.hpp"

#include "plantcap/errors.hpp"
#include "plantcap/diagnostics.hpp"
#include "plantcap/mle.hpp"
#include "plantcap/prob_kernel.hpp"
#include "plantcap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <thread>

namespace plantcap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log1pexp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// log expit'(gamma), the Jacobian a Uniform(0,1) prior picks up on the logit scale
double logit_jacobian(double gamma) { return -log1pexp(-gamma) - log1pexp(gamma); }

struct ClsData {
    std::int64_t m_i, m_yes, m_mb, m_no, y;
    std::optional<std::int64_t> h_i;
    std::int64_t base; // y - m_i - m_yes = m_mb_c + h_c
    std::vector<double> log_choose_mmb;
};

struct ChainState {
    std::vector<double> pc;
    double pic = 0.0;
    double pmb = 0.5;
    std::vector<std::int64_t> z;
    std::vector<std::int64_t> h;
};

struct ChainResult {
    ChainDraws draws;
    std::vector<std::int64_t> accepts, tries;
};

struct Sampler {
    Model model;
    bool up_mode;
    std::vector<ClsData> cls;
    PriorSpec prior;
    McmcConfig cfg;
    std::size_t n_cls;
    bool has_pic;

    std::vector<std::string> names;
    std::size_t n_model_params = 0;
    std::size_t n_blocks = 0; // adaptive update blocks: pc[k]..., pic, pmb, h[k]...

    // ---- factor evaluations (constants dropped; they cancel in MH ratios) ----

    double cell_terms(std::size_t k, double pc, double pic_, double pmb_) const {
        const ClsData& d = cls[k];
        const CellProbs t = theta_id(pc, pic_, pmb_);
        double ll = 0.0;
        const std::int64_t counts[4] = {d.m_i, d.m_yes, d.m_mb, d.m_no};
        for (int j = 0; j < 4; ++j) {
            if (counts[j] == 0) continue;
            if (t[static_cast<std::size_t>(j)] <= 0.0) return kNegInf;
            ll += static_cast<double>(counts[j]) * std::log(t[static_cast<std::size_t>(j)]);
        }
        return ll;
    }

    double z_factor(std::size_t k, std::int64_t z, double pc, double pic_) const {
        const ClsData& d = cls[k];
        if (z < 0 || z > d.m_mb) return kNegInf;
        const double p = conditional_capture_ni(pc, pic_);
        if (p <= 0.0) return z == 0 ? 0.0 : kNegInf;
        if (p >= 1.0) return z == d.m_mb ? 0.0 : kNegInf;
        return d.log_choose_mmb[static_cast<std::size_t>(z)] + static_cast<double>(z) * std::log(p) +
               static_cast<double>(d.m_mb - z) * std::log1p(-p);
    }

    double expansion_factor(std::size_t k, std::int64_t h, double pc, std::int64_t z) const {
        if (up_mode) return 0.0;
        return log_binom(cls[k].base - z, h, pc);
    }

    double id_factor(std::size_t k, std::int64_t z, double pic_) const {
        const ClsData& d = cls[k];
        if (!d.h_i) return 0.0;
        return log_binom(*d.h_i, d.base - z, pic_);
    }

    double h_prior(std::int64_t h) const {
        if (h < 1) return kNegInf;
        return log_prior_h(h, prior);
    }

    // feasible z range; the h constraint disappears in UP mode where the
    // expansion stage is replaced downstream
    std::pair<std::int64_t, std::int64_t> z_range(std::size_t k, std::int64_t h) const {
        const ClsData& d = cls[k];
        std::int64_t lo = up_mode ? 0 : std::max<std::int64_t>(0, d.base - h);
        std::int64_t hi = std::min(d.m_mb, d.base - d.h_i.value_or(0));
        return {lo, hi};
    }

    // ---- one chain ----

    ChainResult run_chain(std::uint64_t chain_index) const {
        Rng rng = Rng::derive(cfg.seed, chain_index);
        ChainState st = initial_state();

        std::vector<double> logit_scale(n_cls + 2, 0.5);
        std::vector<std::int64_t> h_step(n_cls);
        for (std::size_t k = 0; k < n_cls; ++k)
            h_step[k] = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::ceil(0.05 * static_cast<double>(st.h[k]))));

        std::vector<std::int64_t> accepts(n_blocks, 0), tries(n_blocks, 0);
        std::vector<std::int64_t> win_acc(n_blocks, 0), win_try(n_blocks, 0);

        const std::size_t kept =
            static_cast<std::size_t>((cfg.iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin);
        ChainResult out;
        out.draws.columns.assign(names.size(), {});
        for (auto& c : out.draws.columns) c.reserve(kept);

        std::vector<double> h_up(n_cls, 0.0), h0(n_cls, 0.0);

        auto metropolis = [&](std::size_t block, double log_ratio, auto&& commit) {
            ++tries[block];
            ++win_try[block];
            if (std::log(rng.uniform()) < log_ratio) {
                commit();
                ++accepts[block];
                ++win_acc[block];
            }
        };

        for (int it = 0; it < cfg.iterations; ++it) {
            // capture probabilities, one per class
            for (std::size_t k = 0; k < n_cls; ++k) {
                const double g = logit(st.pc[k]);
                const double gp = g + logit_scale[k] * rng.normal();
                const double pcp = expit(gp);
                const double cur = cell_terms(k, st.pc[k], st.pic, st.pmb) +
                                   z_factor(k, st.z[k], st.pc[k], st.pic) +
                                   expansion_factor(k, st.h[k], st.pc[k], st.z[k]) +
                                   logit_jacobian(g);
                const double prop = cell_terms(k, pcp, st.pic, st.pmb) +
                                    z_factor(k, st.z[k], pcp, st.pic) +
                                    expansion_factor(k, st.h[k], pcp, st.z[k]) +
                                    logit_jacobian(gp);
                metropolis(k, prop - cur, [&] { st.pc[k] = pcp; });
            }
            // identification probability, shared across classes
            if (has_pic) {
                const double g = logit(st.pic);
                const double gp = g + logit_scale[n_cls] * rng.normal();
                const double picp = expit(gp);
                double cur = logit_jacobian(g), prop = logit_jacobian(gp);
                for (std::size_t k = 0; k < n_cls; ++k) {
                    cur += cell_terms(k, st.pc[k], st.pic, st.pmb) +
                           z_factor(k, st.z[k], st.pc[k], st.pic) + id_factor(k, st.z[k], st.pic);
                    prop += cell_terms(k, st.pc[k], picp, st.pmb) +
                            z_factor(k, st.z[k], st.pc[k], picp) + id_factor(k, st.z[k], picp);
                }
                metropolis(n_cls, prop - cur, [&] { st.pic = picp; });
            }
            // "maybe" probability
            {
                const double g = logit(st.pmb);
                const double gp = g + logit_scale[n_cls + 1] * rng.normal();
                const double pmbp = expit(gp);
                double cur = logit_jacobian(g), prop = logit_jacobian(gp);
                for (std::size_t k = 0; k < n_cls; ++k) {
                    cur += cell_terms(k, st.pc[k], st.pic, st.pmb);
                    prop += cell_terms(k, st.pc[k], st.pic, pmbp);
                }
                metropolis(n_cls + 1, prop - cur, [&] { st.pmb = pmbp; });
            }
            // latent captured-"maybe" counts; h_c follows from the sum constraint
            for (std::size_t k = 0; k < n_cls; ++k) {
                const auto [lo, hi] = z_range(k, st.h[k]);
                if (lo >= hi) {
                    st.z[k] = hi; // one-point support
                    continue;
                }
                const std::int64_t zp = rng.uniform_int(lo, hi);
                const double cur = z_factor(k, st.z[k], st.pc[k], st.pic) +
                                   expansion_factor(k, st.h[k], st.pc[k], st.z[k]) +
                                   id_factor(k, st.z[k], st.pic);
                const double prop = z_factor(k, zp, st.pc[k], st.pic) +
                                    expansion_factor(k, st.h[k], st.pc[k], zp) +
                                    id_factor(k, zp, st.pic);
                if (std::log(rng.uniform()) < prop - cur) st.z[k] = zp;
            }
            // population sizes: symmetric integer random walk against the
            // expansion binomial and the rounded log-normal prior
            if (!cfg.fixed_h && !up_mode) {
                for (std::size_t k = 0; k < n_cls; ++k) {
                    std::int64_t step = rng.uniform_int(1, h_step[k]);
                    if (rng.uniform() < 0.5) step = -step;
                    const std::int64_t hp = st.h[k] + step;
                    const double cur =
                        expansion_factor(k, st.h[k], st.pc[k], st.z[k]) + h_prior(st.h[k]);
                    const double prop =
                        expansion_factor(k, hp, st.pc[k], st.z[k]) + h_prior(hp);
                    metropolis(n_cls + 2 + k, prop - cur, [&] { st.h[k] = hp; });
                }
            }
            // uncertainty propagation: expand h_c through the normal surrogate
            if (up_mode) {
                for (std::size_t k = 0; k < n_cls; ++k) {
                    const auto hc = static_cast<double>(cls[k].base - st.z[k]);
                    h0[k] = hc / st.pc[k];
                    const double var = h0[k] * (1.0 - st.pc[k]) / st.pc[k];
                    h_up[k] = rng.normal(h0[k], std::sqrt(std::max(0.0, var)));
                }
            }

            // adapt proposal scales toward 30-45% acceptance during burn-in
            if (it < cfg.burn_in && (it + 1) % cfg.adapt_window == 0) {
                for (std::size_t b = 0; b < n_cls + 2; ++b) {
                    if (win_try[b] == 0) continue;
                    const double rate =
                        static_cast<double>(win_acc[b]) / static_cast<double>(win_try[b]);
                    if (rate > 0.45)
                        logit_scale[b] = std::min(50.0, logit_scale[b] * 1.1);
                    else if (rate < 0.30)
                        logit_scale[b] = std::max(1e-3, logit_scale[b] / 1.1);
                }
                for (std::size_t k = 0; k < n_cls; ++k) {
                    const std::size_t b = n_cls + 2 + k;
                    if (win_try[b] == 0) continue;
                    const double rate =
                        static_cast<double>(win_acc[b]) / static_cast<double>(win_try[b]);
                    if (rate > 0.45)
                        h_step[k] = std::min<std::int64_t>(1000000,
                                                           h_step[k] + std::max<std::int64_t>(
                                                                           1, h_step[k] / 10));
                    else if (rate < 0.30)
                        h_step[k] = std::max<std::int64_t>(1, h_step[k] - std::max<std::int64_t>(
                                                                              1, h_step[k] / 10));
                }
                std::fill(win_acc.begin(), win_acc.end(), 0);
                std::fill(win_try.begin(), win_try.end(), 0);
            }

            if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0)
                record(out.draws, st, h_up, h0);
        }
        out.accepts = std::move(accepts);
        out.tries = std::move(tries);
        return out;
    }

    void record(ChainDraws& d, const ChainState& st, const std::vector<double>& h_up,
                const std::vector<double>& h0) const {
        std::size_t c = 0;
        auto push = [&](double v) { d.columns[c++].push_back(v); };
        const bool classed = n_cls > 1;
        if (up_mode) {
            push(std::accumulate(h_up.begin(), h_up.end(), 0.0));
            push(std::accumulate(h0.begin(), h0.end(), 0.0));
            if (classed)
                for (std::size_t k = 0; k < n_cls; ++k) {
                    push(h_up[k]);
                    push(h0[k]);
                }
        } else {
            push(static_cast<double>(std::accumulate(st.h.begin(), st.h.end(), std::int64_t{0})));
            if (classed)
                for (std::size_t k = 0; k < n_cls; ++k) push(static_cast<double>(st.h[k]));
        }
        for (std::size_t k = 0; k < n_cls; ++k) push(st.pc[k]);
        if (has_pic) push(st.pic);
        push(st.pmb);
        for (std::size_t k = 0; k < n_cls; ++k) push(static_cast<double>(st.z[k]));
        for (std::size_t k = 0; k < n_cls; ++k)
            push(static_cast<double>(cls[k].base - st.z[k]));
    }

    ChainState initial_state() const {
        ChainState st;
        st.pc.resize(n_cls);
        for (std::size_t k = 0; k < n_cls; ++k) {
            const ClsData& d = cls[k];
            const double certain = static_cast<double>(d.m_i + d.m_yes);
            const double known = certain + static_cast<double>(d.m_no);
            st.pc[k] = std::clamp(known > 0 ? certain / known : 0.5, 0.05, 0.95);
        }
        {
            std::int64_t mi = 0, myes = 0, mmb = 0, mno = 0;
            for (const auto& d : cls) {
                mi += d.m_i;
                myes += d.m_yes;
                mmb += d.m_mb;
                mno += d.m_no;
            }
            st.pic = std::clamp(
                static_cast<double>(mi) / std::max<double>(1.0, static_cast<double>(mi + myes)),
                0.05, 0.95);
            st.pmb = std::clamp(static_cast<double>(mmb) /
                                    std::max<double>(1.0, static_cast<double>(myes + mmb + mno)),
                                0.05, 0.95);
        }
        if (!has_pic) st.pic = 0.0;

        st.z.resize(n_cls);
        st.h.resize(n_cls);
        for (std::size_t k = 0; k < n_cls; ++k) {
            const ClsData& d = cls[k];
            const std::int64_t hi = std::min(d.m_mb, d.base - d.h_i.value_or(0));
            if (hi < 0)
                fail(Errc::no_feasible_init,
                     "class '" + std::to_string(k) + "': census cannot reach m_i + m_yes + h_i");
            if (cfg.fixed_h) {
                st.h[k] = *cfg.fixed_h;
                const std::int64_t lo = std::max<std::int64_t>(0, d.base - st.h[k]);
                if (lo > hi)
                    fail(Errc::no_feasible_init,
                         "fixed h leaves no feasible captured-'maybe' count");
                st.z[k] = (lo + hi) / 2;
            } else {
                st.z[k] = hi / 2;
                const double h0 = static_cast<double>(d.y) / st.pc[k] -
                                  static_cast<double>(d.m_i + d.m_yes + d.m_mb + d.m_no);
                st.h[k] = std::max<std::int64_t>(
                    {static_cast<std::int64_t>(std::llround(h0)), d.base - st.z[k], 1});
            }
        }
        return st;
    }
};

Sampler make_sampler(Model model, const ClassedCounts& data, const PriorSpec& prior,
                     const McmcConfig& cfg, bool up_mode) {
    validate(data);
    cfg.check();
    if (model != Model::classed && data.n_classes() != 1)
        fail(Errc::bad_config, "models basic/id take a single-class survey");
    if (up_mode && model == Model::basic)
        fail(Errc::bad_config, "the uncertainty-propagation variant applies to the id/class models");

    Sampler s;
    s.model = model;
    s.up_mode = up_mode;
    s.prior = prior;
    s.cfg = cfg;
    s.n_cls = data.n_classes();
    s.has_pic = model != Model::basic;
    for (const auto& c : data.classes) {
        ClsData d{c.counts.m_i, c.counts.m_yes, c.counts.m_mb, c.counts.m_no,
                  c.counts.y,   c.counts.h_i,   0,             {}};
        if (model == Model::basic && (d.m_i != 0 || d.h_i))
            fail(Errc::bad_config, "the basic model has no identification counts");
        d.base = d.y - d.m_i - d.m_yes;
        for (std::int64_t z = 0; z <= d.m_mb; ++z)
            d.log_choose_mmb.push_back(log_choose(d.m_mb, z));
        s.cls.push_back(std::move(d));
    }

    const bool classed = s.n_cls > 1;
    auto label = [&](std::size_t k) { return data.classes[k].label; };
    s.names.push_back("H");
    if (up_mode) s.names.push_back("H0");
    if (classed)
        for (std::size_t k = 0; k < s.n_cls; ++k) {
            s.names.push_back("H[" + label(k) + "]");
            if (up_mode) s.names.push_back("H0[" + label(k) + "]");
        }
    for (std::size_t k = 0; k < s.n_cls; ++k)
        s.names.push_back(classed ? "p_c[" + label(k) + "]" : "p_c");
    if (s.has_pic) s.names.push_back("p_i_c");
    s.names.push_back(model == Model::basic ? "p_mb" : "p_mb_ni");
    s.n_model_params = s.names.size();
    for (std::size_t k = 0; k < s.n_cls; ++k)
        s.names.push_back(classed ? "m_mb_c[" + label(k) + "]" : "m_mb_c");
    for (std::size_t k = 0; k < s.n_cls; ++k)
        s.names.push_back(classed ? "h_c[" + label(k) + "]" : "h_c");
    s.n_blocks = 2 * s.n_cls + 2;
    return s;
}

McmcOutput run_sampler(const Sampler& s) {
    const auto n_chains = static_cast<std::size_t>(s.cfg.chains);
    std::vector<ChainResult> results(n_chains);

    int jobs = s.cfg.jobs > 0 ? s.cfg.jobs
                              : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n_chains)));
    if (jobs == 1) {
        for (std::size_t c = 0; c < n_chains; ++c) results[c] = s.run_chain(c);
    } else {
        std::vector<std::future<void>> futs;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < jobs; ++w)
            futs.push_back(std::async(std::launch::async, [&] {
                for (std::size_t c = next.fetch_add(1); c < n_chains; c = next.fetch_add(1))
                    results[c] = s.run_chain(c);
            }));
        for (auto& f : futs) f.get();
    }

    McmcOutput out;
    out.names = s.names;
    out.n_model_params = s.n_model_params;
    for (auto& r : results) out.chains.push_back(std::move(r.draws));

    out.accept_rates.assign(s.n_blocks, 0.0);
    for (std::size_t b = 0; b < s.n_blocks; ++b) {
        std::int64_t acc = 0, tr = 0;
        for (const auto& r : results) {
            acc += r.accepts[b];
            tr += r.tries[b];
        }
        out.accept_rates[b] = tr > 0 ? static_cast<double>(acc) / static_cast<double>(tr) : 0.0;
    }

    out.converged_ok = true;
    for (std::size_t p = 0; p < out.names.size(); ++p) {
        std::vector<std::span<const double>> chains;
        for (const auto& c : out.chains)
            chains.emplace_back(c.columns[p].data(), c.columns[p].size());
        const ParamDiag d = split_rhat_ess(chains);
        out.diagnostics.push_back(d);
        if (p < out.n_model_params && !d.degenerate && d.rhat > 1.05) out.converged_ok = false;

        auto pooled = out.pooled(p);
        out.summaries.push_back(summarize_draws(pooled));
    }
    return out;
}

} // namespace

void McmcConfig::check() const {
    if (chains < 1) fail(Errc::bad_config, "chains must be >= 1");
    if (burn_in < 0 || burn_in >= iterations)
        fail(Errc::bad_config, "burn-in must be smaller than the iteration count");
    if (thin < 1) fail(Errc::bad_config, "thin must be >= 1");
    if (adapt_window < 1) fail(Errc::bad_config, "adaptation window must be >= 1");
}

std::size_t McmcOutput::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    fail(Errc::bad_config, "no sampled quantity named '" + name + "'");
}

std::vector<double> McmcOutput::pooled(std::size_t param) const {
    std::vector<double> all;
    for (const auto& c : chains)
        all.insert(all.end(), c.columns[param].begin(), c.columns[param].end());
    return all;
}

FitResult McmcOutput::as_fit_result() const {
    FitResult fit;
    fit.converged = converged_ok;
    for (std::size_t p = 0; p < n_model_params; ++p) {
        const PosteriorSummary& s = summaries[p];
        fit.params.push_back({names[p], s.median, s.sd, s.q025, s.q975, false});
        if (names[p] == "H") {
            fit.h_total = fit.params.back();
            fit.h_continuous = s.median;
            fit.h_rounded = static_cast<std::int64_t>(std::floor(s.median));
        }
    }
    return fit;
}

McmcOutput sample_posterior(Model model, const ClassedCounts& data, const PriorSpec& prior,
                            const McmcConfig& config) {
    return run_sampler(make_sampler(model, data, prior, config, false));
}

McmcOutput sample_posterior_up(Model model, const ClassedCounts& data, const PriorSpec& prior,
                               const McmcConfig& config) {
    return run_sampler(make_sampler(model, data, prior, config, true));
}

void export_draws(const McmcOutput& output, const std::string& prefix) {
    for (std::size_t c = 0; c < output.chains.size(); ++c) {
        const std::string path = prefix + "_chain" + std::to_string(c + 1) + ".csv";
        std::ofstream f(path);
        if (!f) fail(Errc::io_error, "cannot write '" + path + "'");
        for (std::size_t p = 0; p < output.names.size(); ++p)
            f << (p ? "," : "") << output.names[p];
        f << "\n";
        const auto& cols = output.chains[c].columns;
        const std::size_t rows = cols.empty() ? 0 : cols[0].size();
        f.precision(17);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t p = 0; p < cols.size(); ++p) f << (p ? "," : "") << cols[p][r];
            f << "\n";
        }
    }
}

} // namespace plantcap
