#pragma once

#include "plantcap/survey_data.hpp"

#include <cstdint>

namespace plantcap {

/// The two extreme treatments of "maybe" plants the classical estimator
/// needs, since it cannot represent uncertain capture status.
enum class MaybeTreatment { as_seen, as_not_seen };

/// Bias-corrected Petersen-type baseline for the target population size:
/// with m the plants counted as seen and M the plants deployed,
///   H = round((M + 1)(y - m) / (m + 1)).
std::int64_t chapman_bailey(const IdCounts& data, MaybeTreatment treatment);

} // namespace plantcap
