#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plantcap {

/// Observed counts for a capture-without-identification survey:
/// plants by self-assessment plus the census total.
struct BasicCounts {
    std::int64_t m_yes = 0; ///< plants certain they were captured
    std::int64_t m_mb = 0;  ///< plants unsure ("maybe")
    std::int64_t m_no = 0;  ///< plants certain they were not captured
    std::int64_t y = 0;     ///< census count (plants + target individuals)

    std::int64_t m_total() const { return m_yes + m_mb + m_no; }
};

/// Observed counts when part of the captures are identified (interviewed).
/// m_yes/m_mb/m_no refer to the non-identified plants only. h_i (identified
/// target individuals) is optional; its absence selects the survey variant
/// where that count was never collected.
struct IdCounts {
    std::int64_t m_i = 0;
    std::int64_t m_yes = 0;
    std::int64_t m_mb = 0;
    std::int64_t m_no = 0;
    std::int64_t y = 0;
    std::optional<std::int64_t> h_i;

    std::int64_t m_total() const { return m_i + m_yes + m_mb + m_no; }
};

struct SurveyClass {
    std::string label;
    IdCounts counts;
};

/// One or more survey classes (sites grouped by capture difficulty).
/// Non-class designs are represented as a single class.
struct ClassedCounts {
    std::vector<SurveyClass> classes;

    std::size_t n_classes() const { return classes.size(); }
    const IdCounts& single() const { return classes.front().counts; }
};

/// Validation: throws Error with the specific violation, otherwise returns
/// the input unchanged.
BasicCounts validate(const BasicCounts& data);
IdCounts validate(const IdCounts& data);
ClassedCounts validate(const ClassedCounts& data);

/// Single-class wrappers used by the shared ingestion/fitting paths.
ClassedCounts wrap_single(const IdCounts& data, const std::string& label = "all");
IdCounts as_id(const BasicCounts& data);

/// View of an IdCounts as BasicCounts. Requires m_i == 0 and no h_i.
BasicCounts as_basic(const IdCounts& data);

enum class SurveyFormat { csv, json };

/// Reads a survey file: CSV (header row, one row per class) or JSON (one
/// record with a "classes" array). Column/field names: label, m_i, m_yes,
/// m_mb, m_no, y, h_i; label and m_i and h_i are optional.
ClassedCounts load_survey(const std::string& path, SurveyFormat format);
ClassedCounts parse_survey_csv(const std::string& text, const std::string& origin = "<string>");
ClassedCounts parse_survey_json(const std::string& text, const std::string& origin = "<string>");

void write_survey(const std::string& path, const ClassedCounts& data, SurveyFormat format);
std::string render_survey_csv(const ClassedCounts& data);
std::string render_survey_json(const ClassedCounts& data);

/// Format inferred from the file extension (.csv / .json).
SurveyFormat guess_format(const std::string& path);

/// The 1990 S-Night street enumeration counts for the five surveyed cities,
/// keyed by snake_case city name. h_i is absent for all cities.
const std::vector<std::pair<std::string, IdCounts>>& snight_dataset();
const IdCounts& snight_city(const std::string& name);
std::string snight_display_name(const std::string& key);

} // namespace plantcap
