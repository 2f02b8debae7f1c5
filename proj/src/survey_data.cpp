#include "plantcap/survey_data.hpp"

#include "plantcap/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace plantcap {

using nlohmann::ordered_json;

namespace {

void check_nonnegative(std::int64_t v, const char* field, const std::string& where) {
    if (v < 0)
        fail(Errc::negative_count, where + ": field '" + field + "' is negative (" +
                                        std::to_string(v) + ")");
}

} // namespace

BasicCounts validate(const BasicCounts& data) {
    check_nonnegative(data.m_yes, "m_yes", "counts");
    check_nonnegative(data.m_mb, "m_mb", "counts");
    check_nonnegative(data.m_no, "m_no", "counts");
    check_nonnegative(data.y, "y", "counts");
    if (data.y < data.m_yes)
        fail(Errc::census_below_certain_captures,
             "census y=" + std::to_string(data.y) + " is below the certain captures m_yes=" +
                 std::to_string(data.m_yes));
    return data;
}

IdCounts validate(const IdCounts& data) {
    check_nonnegative(data.m_i, "m_i", "counts");
    check_nonnegative(data.m_yes, "m_yes", "counts");
    check_nonnegative(data.m_mb, "m_mb", "counts");
    check_nonnegative(data.m_no, "m_no", "counts");
    check_nonnegative(data.y, "y", "counts");
    if (data.h_i) check_nonnegative(*data.h_i, "h_i", "counts");
    if (data.y < data.m_i + data.m_yes)
        fail(Errc::census_below_certain_captures,
             "census y=" + std::to_string(data.y) + " is below the certain captures m_i+m_yes=" +
                 std::to_string(data.m_i + data.m_yes));
    return data;
}

ClassedCounts validate(const ClassedCounts& data) {
    if (data.classes.empty()) fail(Errc::empty_class_list, "survey has no classes");
    std::vector<std::string> labels;
    for (const auto& c : data.classes) {
        if (std::find(labels.begin(), labels.end(), c.label) != labels.end())
            fail(Errc::parse_error, "duplicate class label '" + c.label + "'");
        labels.push_back(c.label);
        validate(c.counts);
    }
    return data;
}

ClassedCounts wrap_single(const IdCounts& data, const std::string& label) {
    return ClassedCounts{{SurveyClass{label, data}}};
}

IdCounts as_id(const BasicCounts& data) {
    return IdCounts{0, data.m_yes, data.m_mb, data.m_no, data.y, std::nullopt};
}

BasicCounts as_basic(const IdCounts& data) {
    if (data.m_i != 0)
        fail(Errc::bad_config, "data has identified plants (m_i=" + std::to_string(data.m_i) +
                                   "); the basic model requires m_i=0");
    if (data.h_i)
        fail(Errc::bad_config, "data carries h_i; the basic model has no identification stage");
    return BasicCounts{data.m_yes, data.m_mb, data.m_no, data.y};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
    }
    return out;
}

std::int64_t parse_count(const std::string& field, const std::string& name,
                         const std::string& origin, std::size_t line_no) {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(field, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != field.size() || field.empty())
        fail(Errc::parse_error, origin + ":" + std::to_string(line_no) + ": field '" + name +
                                    "' is not an integer: '" + field + "'");
    return v;
}

} // namespace

ClassedCounts parse_survey_csv(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    ClassedCounts out;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (header.empty()) {
            header = fields;
            continue;
        }
        if (fields.size() != header.size())
            fail(Errc::parse_error, origin + ":" + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
        SurveyClass cls;
        bool has_y = false, has_yes = false, has_mb = false, has_no = false;
        for (std::size_t j = 0; j < header.size(); ++j) {
            const std::string& name = header[j];
            const std::string& val = fields[j];
            if (name == "label") {
                cls.label = val;
            } else if (name == "m_i") {
                cls.counts.m_i = parse_count(val, name, origin, line_no);
            } else if (name == "m_yes") {
                cls.counts.m_yes = parse_count(val, name, origin, line_no);
                has_yes = true;
            } else if (name == "m_mb") {
                cls.counts.m_mb = parse_count(val, name, origin, line_no);
                has_mb = true;
            } else if (name == "m_no") {
                cls.counts.m_no = parse_count(val, name, origin, line_no);
                has_no = true;
            } else if (name == "y") {
                cls.counts.y = parse_count(val, name, origin, line_no);
                has_y = true;
            } else if (name == "h_i") {
                if (!val.empty()) cls.counts.h_i = parse_count(val, name, origin, line_no);
            } else {
                fail(Errc::parse_error,
                     origin + ":1: unknown column '" + name + "' in header");
            }
        }
        if (!(has_y && has_yes && has_mb && has_no))
            fail(Errc::parse_error, origin + ":" + std::to_string(line_no) +
                                        ": required columns are m_yes, m_mb, m_no, y");
        if (cls.label.empty()) cls.label = "class" + std::to_string(out.classes.size() + 1);
        out.classes.push_back(std::move(cls));
    }
    return validate(out);
}

ClassedCounts parse_survey_json(const std::string& text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        fail(Errc::parse_error, origin + ": " + e.what());
    }
    ClassedCounts out;
    try {
        if (!j.contains("classes") || !j["classes"].is_array())
            fail(Errc::parse_error, origin + ": expected a top-level 'classes' array");
        std::size_t idx = 0;
        for (const auto& e : j["classes"]) {
            ++idx;
            SurveyClass cls;
            cls.label = e.value("label", "class" + std::to_string(idx));
            cls.counts.m_i = e.value("m_i", std::int64_t{0});
            for (const char* req : {"m_yes", "m_mb", "m_no", "y"})
                if (!e.contains(req))
                    fail(Errc::parse_error,
                         origin + ": class " + std::to_string(idx) + " lacks field '" + req + "'");
            cls.counts.m_yes = e["m_yes"].get<std::int64_t>();
            cls.counts.m_mb = e["m_mb"].get<std::int64_t>();
            cls.counts.m_no = e["m_no"].get<std::int64_t>();
            cls.counts.y = e["y"].get<std::int64_t>();
            if (e.contains("h_i") && !e["h_i"].is_null())
                cls.counts.h_i = e["h_i"].get<std::int64_t>();
            out.classes.push_back(std::move(cls));
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(Errc::parse_error, origin + ": " + e.what());
    }
    return validate(out);
}

ClassedCounts load_survey(const std::string& path, SurveyFormat format) {
    std::ifstream f(path);
    if (!f) fail(Errc::io_error, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return format == SurveyFormat::csv ? parse_survey_csv(buf.str(), path)
                                       : parse_survey_json(buf.str(), path);
}

std::string render_survey_csv(const ClassedCounts& data) {
    const bool any_hi = std::any_of(data.classes.begin(), data.classes.end(),
                                    [](const SurveyClass& c) { return c.counts.h_i.has_value(); });
    std::ostringstream out;
    out << "label,m_i,m_yes,m_mb,m_no,y";
    if (any_hi) out << ",h_i";
    out << "\n";
    for (const auto& c : data.classes) {
        out << c.label << ',' << c.counts.m_i << ',' << c.counts.m_yes << ',' << c.counts.m_mb
            << ',' << c.counts.m_no << ',' << c.counts.y;
        if (any_hi) {
            out << ',';
            if (c.counts.h_i) out << *c.counts.h_i;
        }
        out << "\n";
    }
    return out.str();
}

std::string render_survey_json(const ClassedCounts& data) {
    ordered_json j;
    j["classes"] = ordered_json::array();
    for (const auto& c : data.classes) {
        ordered_json e;
        e["label"] = c.label;
        e["m_i"] = c.counts.m_i;
        e["m_yes"] = c.counts.m_yes;
        e["m_mb"] = c.counts.m_mb;
        e["m_no"] = c.counts.m_no;
        e["y"] = c.counts.y;
        if (c.counts.h_i) e["h_i"] = *c.counts.h_i;
        j["classes"].push_back(e);
    }
    return j.dump(2) + "\n";
}

void write_survey(const std::string& path, const ClassedCounts& data, SurveyFormat format) {
    std::ofstream f(path);
    if (!f) fail(Errc::io_error, "cannot write '" + path + "'");
    f << (format == SurveyFormat::csv ? render_survey_csv(data) : render_survey_json(data));
}

SurveyFormat guess_format(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "json") return SurveyFormat::json;
    return SurveyFormat::csv;
}

const std::vector<std::pair<std::string, IdCounts>>& snight_dataset() {
    // 1990 S-Night counts per city: m_i, m_yes, m_mb, m_no, y; the count of
    // identified target individuals was never published, so h_i stays absent.
    static const std::vector<std::pair<std::string, IdCounts>> data = {
        {"chicago", {2, 0, 5, 6, 11, std::nullopt}},
        {"new_orleans", {41, 6, 5, 6, 109, std::nullopt}},
        {"phoenix", {18, 3, 1, 4, 104, std::nullopt}},
        {"new_york", {40, 19, 13, 22, 1240, std::nullopt}},
        {"los_angeles", {16, 1, 2, 6, 217, std::nullopt}},
    };
    return data;
}

const IdCounts& snight_city(const std::string& name) {
    for (const auto& [key, counts] : snight_dataset())
        if (key == name) return counts;
    fail(Errc::bad_config, "unknown S-Night city '" + name +
                               "' (expected one of chicago, new_orleans, phoenix, new_york, "
                               "los_angeles)");
}

std::string snight_display_name(const std::string& key) {
    static const std::map<std::string, std::string> names = {
        {"chicago", "Chicago"},
        {"new_orleans", "New Orleans"},
        {"phoenix", "Phoenix"},
        {"new_york", "New York"},
        {"los_angeles", "Los Angeles"},
    };
    const auto it = names.find(key);
    return it == names.end() ? key : it->second;
}

} // namespace plantcap
