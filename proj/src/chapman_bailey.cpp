#include "plantcap/chapman_bailey.hpp"

#include <cmath>

namespace plantcap {

std::int64_t chapman_bailey(const IdCounts& data, MaybeTreatment treatment) {
    validate(data);
    const std::int64_t m_seen =
        data.m_i + data.m_yes + (treatment == MaybeTreatment::as_seen ? data.m_mb : 0);
    const auto plants = static_cast<double>(data.m_total());
    const auto est = (plants + 1.0) * static_cast<double>(data.y - m_seen) /
                     (static_cast<double>(m_seen) + 1.0);
    return static_cast<std::int64_t>(std::llround(est));
}

} // namespace plantcap
