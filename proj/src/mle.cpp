#include "plantcap/mle.hpp"

#include "plantcap/errors.hpp"
#include "plantcap/prob_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace plantcap {

namespace {

double clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

Objective objective_for(Model model, const ClassedCounts& data) {
    switch (model) {
        case Model::basic: {
            // the stirling-core surface keeps the continuous optimum on the
            // closed-form estimators
            const BasicCounts d = as_basic(data.single());
            return [d](const std::vector<double>& g) {
                return loglik_basic({std::exp(g[0]), expit(g[1]), expit(g[2])}, d,
                                    HExpansion::stirling_core);
            };
        }
        case Model::id: {
            const IdCounts d = data.single();
            return [d](const std::vector<double>& g) {
                return loglik_id({std::exp(g[0]), expit(g[1]), expit(g[2]), expit(g[3])}, d);
            };
        }
        case Model::classed: {
            const ClassedCounts d = data;
            const std::size_t k = d.n_classes();
            return [d, k](const std::vector<double>& g) {
                ClassParams p;
                for (std::size_t i = 0; i < k; ++i) p.h.push_back(std::exp(g[i]));
                for (std::size_t i = 0; i < k; ++i) p.p_c.push_back(expit(g[k + i]));
                p.p_i_c = expit(g[2 * k]);
                p.p_mb_ni = expit(g[2 * k + 1]);
                return loglik_class(p, d);
            };
        }
    }
    fail(Errc::bad_config, "unreachable model");
}

ParamLayout layout_for(Model model, const ClassedCounts& data) {
    std::vector<std::string> labels;
    for (const auto& c : data.classes) labels.push_back(c.label);
    return make_layout(model, data.n_classes(), labels);
}

/// Smallest h that keeps the latent range nonempty for this class.
double feasible_h_floor(const IdCounts& d) {
    const auto base = static_cast<double>(d.y - d.m_i - d.m_yes);
    return std::max({base - static_cast<double>(d.m_mb) + 1.0,
                     static_cast<double>(d.h_i.value_or(0)) + 1.0, 1.0});
}

} // namespace

std::vector<double> moments_start(Model model, const ClassedCounts& data) {
    const ParamLayout layout = layout_for(model, data);
    std::vector<double> gamma(layout.dim(), 0.0);

    std::int64_t tot_mi = 0, tot_myes = 0, tot_mmb = 0, tot_mno = 0;
    for (std::size_t k = 0; k < data.n_classes(); ++k) {
        const IdCounts& d = data.classes[k].counts;
        tot_mi += d.m_i;
        tot_myes += d.m_yes;
        tot_mmb += d.m_mb;
        tot_mno += d.m_no;
        const double certain = static_cast<double>(d.m_i + d.m_yes);
        const double known = certain + static_cast<double>(d.m_no);
        const double pc0 = clip(known > 0 ? certain / known : 0.5, 0.05, 0.95);
        const double h0 = std::max(static_cast<double>(d.y) / pc0 -
                                       static_cast<double>(d.m_total()),
                                   feasible_h_floor(d));
        gamma[layout.h_index(k)] = std::log(h0);
        gamma[layout.pc_index(k)] = logit(pc0);
    }
    const double certain = static_cast<double>(tot_mi + tot_myes);
    const double pmb0 =
        clip(static_cast<double>(tot_mmb) /
                 std::max<double>(1.0, static_cast<double>(tot_myes + tot_mmb + tot_mno)),
             0.05, 0.95);
    gamma[layout.pmb_index()] = logit(pmb0);
    if (model != Model::basic) {
        const double pic0 =
            clip(certain > 0 ? static_cast<double>(tot_mi) / certain : 0.5, 0.05, 0.95);
        gamma[layout.pic_index()] = logit(pic0);
    }
    return gamma;
}

FitResult mle_numeric(Model model, const ClassedCounts& data, const FitPipelineOptions& options) {
    validate(data);
    if (model != Model::classed && data.n_classes() != 1)
        fail(Errc::bad_config, "models basic/id take a single-class survey");

    const ParamLayout layout = layout_for(model, data);
    const Objective obj = objective_for(model, data);

    std::vector<double> start = moments_start(model, data);
    if (!std::isfinite(obj(start))) {
        // fixed fallback: even odds on probabilities, twice the census for h
        std::vector<double> fb(layout.dim(), 0.0);
        for (std::size_t k = 0; k < layout.n_classes; ++k) {
            const IdCounts& d = data.classes[k].counts;
            fb[layout.h_index(k)] =
                std::log(std::max(2.0 * static_cast<double>(d.y), feasible_h_floor(d)));
        }
        if (!std::isfinite(obj(fb)))
            fail(Errc::infeasible_data, "log-likelihood is not finite at any start point");
        start = fb;
    }
    return maximize_and_summarize(layout, obj, start, options);
}

FitResult mle_basic_closed(const BasicCounts& data) {
    validate(data);
    if (data.m_yes + data.m_no == 0)
        fail(Errc::no_certain_plants, "no plants with certain capture status (m_yes + m_no = 0)");
    if (data.m_yes == 0)
        fail(Errc::no_certain_captures,
             "no plants self-assessed 'yes'; the capture probability estimate degenerates to 0");

    const double p_c = static_cast<double>(data.m_yes) /
                       static_cast<double>(data.m_yes + data.m_no);
    const double p_mb = static_cast<double>(data.m_mb) / static_cast<double>(data.m_total());
    const double h_cont = static_cast<double>(data.y) / p_c -
                          static_cast<double>(data.m_total());

    const ParamLayout layout = make_layout(Model::basic);
    const Objective obj = [data](const std::vector<double>& g) {
        return loglik_basic({std::exp(g[0]), expit(g[1]), expit(g[2])}, data,
                            HExpansion::stirling_core);
    };

    std::vector<double> gamma(3, 0.0);
    std::vector<int> pinned(3, 0);
    if (h_cont <= 1e-9) {
        pinned[0] = -1;
        gamma[0] = -18.0;
    } else {
        gamma[0] = std::log(h_cont);
    }
    if (data.m_no == 0) {
        pinned[1] = 1;
        gamma[1] = 18.0;
    } else {
        gamma[1] = logit(p_c);
    }
    if (data.m_mb == 0) {
        pinned[2] = -1;
        gamma[2] = -18.0;
    } else {
        gamma[2] = logit(p_mb);
    }

    FitResult fit = summarize_at_mode(layout, obj, gamma, pinned);
    // report the exact closed-form values (the transform round-trip is exact
    // to machine precision anyway; boundary coordinates are snapped already)
    if (pinned[0] == 0) {
        fit.params[0].estimate = h_cont;
        fit.h_total = fit.params[0];
        fit.h_continuous = h_cont;
        fit.h_rounded = static_cast<std::int64_t>(std::floor(h_cont));
    }
    if (pinned[1] == 0) fit.params[1].estimate = p_c;
    if (pinned[2] == 0) fit.params[2].estimate = p_mb;
    return fit;
}

} // namespace plantcap
