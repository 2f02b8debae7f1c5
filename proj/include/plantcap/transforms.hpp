#pragma once

#include "plantcap/fit_result.hpp"
#include "plantcap/prob_kernel.hpp"

#include <span>
#include <string>
#include <vector>

namespace plantcap {

/// Unconstrained coordinate kinds: log for counts, logit for probabilities.
enum class Scale { log_count, logit_prob };

double to_unconstrained(double x, Scale scale);
double to_natural(double gamma, Scale scale);

double logit(double p);
double expit(double gamma);

/// Coordinate layout of the transformed parameter vector for one model:
///   basic:  [log h, logit p_c, logit p_mb]
///   id:     [log h, logit p_c, logit p_i_c, logit p_mb_ni]
///   class:  [log h_1..h_K, logit p_c_1..p_c_K, logit p_i_c, logit p_mb_ni]
struct ParamLayout {
    Model model = Model::basic;
    std::size_t n_classes = 1;
    std::vector<Scale> scales;
    std::vector<std::string> names;

    std::size_t dim() const { return scales.size(); }
    std::size_t h_index(std::size_t k = 0) const { return k; }
    std::size_t pc_index(std::size_t k = 0) const { return n_classes + k; }
    std::size_t pic_index() const { return 2 * n_classes; }
    std::size_t pmb_index() const {
        return model == Model::basic ? 2 : (model == Model::id ? 3 : 2 * n_classes + 1);
    }
};

ParamLayout make_layout(Model model, std::size_t n_classes = 1,
                        std::span<const std::string> labels = {});

std::vector<double> transform(std::span<const double> natural, const ParamLayout& layout);
std::vector<double> inverse_transform(std::span<const double> gamma, const ParamLayout& layout);

/// Natural-vector packing in layout order.
std::vector<double> pack(const BasicParams& p);
std::vector<double> pack(const IdParams& p);
std::vector<double> pack(const ClassParams& p);
BasicParams unpack_basic(std::span<const double> v);
IdParams unpack_id(std::span<const double> v);
ClassParams unpack_class(std::span<const double> v, std::size_t n_classes);

} // namespace plantcap
