#include "plantcap/errors.hpp"

namespace plantcap {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::negative_count: return "negative_count";
        case Errc::census_below_certain_captures: return "census_below_certain_captures";
        case Errc::empty_class_list: return "empty_class_list";
        case Errc::parse_error: return "parse_error";
        case Errc::infeasible_data: return "infeasible_data";
        case Errc::non_finite_start: return "non_finite_start";
        case Errc::non_finite_evaluation: return "non_finite_evaluation";
        case Errc::negative_variance: return "negative_variance";
        case Errc::no_certain_captures: return "no_certain_captures";
        case Errc::no_certain_plants: return "no_certain_plants";
        case Errc::optimizer_failure: return "optimizer_failure";
        case Errc::no_feasible_init: return "no_feasible_init";
        case Errc::insufficient_draws: return "insufficient_draws";
        case Errc::unknown_preset: return "unknown_preset";
        case Errc::all_replicates_failed: return "all_replicates_failed";
        case Errc::bad_config: return "bad_config";
        case Errc::io_error: return "io_error";
    }
    return "unknown";
}

} // namespace plantcap
