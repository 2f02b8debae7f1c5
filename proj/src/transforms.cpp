#include "plantcap/transforms.hpp"

#include "plantcap/errors.hpp"

#include <cmath>

namespace plantcap {

const char* model_name(Model m) {
    switch (m) {
        case Model::basic: return "basic";
        case Model::id: return "id";
        case Model::classed: return "class";
    }
    return "?";
}

Model model_from_name(const std::string& name) {
    if (name == "basic") return Model::basic;
    if (name == "id") return Model::id;
    if (name == "class" || name == "classed") return Model::classed;
    fail(Errc::bad_config, "unknown model '" + name + "' (expected basic, id or class)");
}

const ParamEstimate* FitResult::find(const std::string& name) const {
    for (const auto& p : params)
        if (p.name == name) return &p;
    return nullptr;
}

double logit(double p) { return std::log(p / (1.0 - p)); }
double expit(double gamma) { return 1.0 / (1.0 + std::exp(-gamma)); }

double to_unconstrained(double x, Scale scale) {
    return scale == Scale::log_count ? std::log(x) : logit(x);
}

double to_natural(double gamma, Scale scale) {
    return scale == Scale::log_count ? std::exp(gamma) : expit(gamma);
}

ParamLayout make_layout(Model model, std::size_t n_classes, std::span<const std::string> labels) {
    ParamLayout l;
    l.model = model;
    l.n_classes = model == Model::classed ? n_classes : 1;
    auto label = [&](std::size_t k) {
        return k < labels.size() ? labels[k] : "class" + std::to_string(k + 1);
    };
    switch (model) {
        case Model::basic:
            l.scales = {Scale::log_count, Scale::logit_prob, Scale::logit_prob};
            l.names = {"H", "p_c", "p_mb"};
            break;
        case Model::id:
            l.scales = {Scale::log_count, Scale::logit_prob, Scale::logit_prob,
                        Scale::logit_prob};
            l.names = {"H", "p_c", "p_i_c", "p_mb_ni"};
            break;
        case Model::classed:
            for (std::size_t k = 0; k < n_classes; ++k) {
                l.scales.push_back(Scale::log_count);
                l.names.push_back("H[" + label(k) + "]");
            }
            for (std::size_t k = 0; k < n_classes; ++k) {
                l.scales.push_back(Scale::logit_prob);
                l.names.push_back("p_c[" + label(k) + "]");
            }
            l.scales.push_back(Scale::logit_prob);
            l.names.push_back("p_i_c");
            l.scales.push_back(Scale::logit_prob);
            l.names.push_back("p_mb_ni");
            break;
    }
    return l;
}

std::vector<double> transform(std::span<const double> natural, const ParamLayout& layout) {
    std::vector<double> out(layout.dim());
    for (std::size_t j = 0; j < layout.dim(); ++j)
        out[j] = to_unconstrained(natural[j], layout.scales[j]);
    return out;
}

std::vector<double> inverse_transform(std::span<const double> gamma, const ParamLayout& layout) {
    std::vector<double> out(layout.dim());
    for (std::size_t j = 0; j < layout.dim(); ++j)
        out[j] = to_natural(gamma[j], layout.scales[j]);
    return out;
}

std::vector<double> pack(const BasicParams& p) { return {p.h, p.p_c, p.p_mb}; }
std::vector<double> pack(const IdParams& p) { return {p.h, p.p_c, p.p_i_c, p.p_mb_ni}; }

std::vector<double> pack(const ClassParams& p) {
    std::vector<double> v;
    v.insert(v.end(), p.h.begin(), p.h.end());
    v.insert(v.end(), p.p_c.begin(), p.p_c.end());
    v.push_back(p.p_i_c);
    v.push_back(p.p_mb_ni);
    return v;
}

BasicParams unpack_basic(std::span<const double> v) { return {v[0], v[1], v[2]}; }
IdParams unpack_id(std::span<const double> v) { return {v[0], v[1], v[2], v[3]}; }

ClassParams unpack_class(std::span<const double> v, std::size_t n_classes) {
    ClassParams p;
    p.h.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_classes));
    p.p_c.assign(v.begin() + static_cast<std::ptrdiff_t>(n_classes),
                 v.begin() + static_cast<std::ptrdiff_t>(2 * n_classes));
    p.p_i_c = v[2 * n_classes];
    p.p_mb_ni = v[2 * n_classes + 1];
    return p;
}

} // namespace plantcap
