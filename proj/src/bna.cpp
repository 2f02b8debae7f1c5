#include "plantcap/bna.hpp"

#include "plantcap/errors.hpp"
#include "plantcap/prob_kernel.hpp"

#include <cmath>

namespace plantcap {

FitResult bna_fit(Model model, const ClassedCounts& data, const PriorSpec& prior,
                  const FitPipelineOptions& options) {
    validate(data);
    if (model != Model::classed && data.n_classes() != 1)
        fail(Errc::bad_config, "models basic/id take a single-class survey");

    std::vector<std::string> labels;
    for (const auto& c : data.classes) labels.push_back(c.label);
    const ParamLayout layout = make_layout(model, data.n_classes(), labels);
    const std::size_t k = layout.n_classes;

    Objective log_post = [model, data, layout, prior, k](const std::vector<double>& g) {
        double ll = 0.0;
        switch (model) {
            case Model::basic:
                ll = loglik_basic({std::exp(g[0]), expit(g[1]), expit(g[2])},
                                  as_basic(data.single()));
                break;
            case Model::id:
                ll = loglik_id({std::exp(g[0]), expit(g[1]), expit(g[2]), expit(g[3])},
                               data.single());
                break;
            case Model::classed: {
                ClassParams p;
                for (std::size_t i = 0; i < k; ++i) p.h.push_back(std::exp(g[i]));
                for (std::size_t i = 0; i < k; ++i) p.p_c.push_back(expit(g[k + i]));
                p.p_i_c = expit(g[2 * k]);
                p.p_mb_ni = expit(g[2 * k + 1]);
                ll = loglik_class(p, data);
                break;
            }
        }
        if (!std::isfinite(ll)) return ll;
        return ll + log_prior_transformed(g, layout, prior);
    };

    std::vector<double> start = moments_start(model, data);
    if (!std::isfinite(log_post(start)))
        fail(Errc::infeasible_data, "log-posterior is not finite at the start point");
    return maximize_and_summarize(layout, log_post, start, options);
}

} // namespace plantcap
