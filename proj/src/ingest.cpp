// SPDX-License-Identifier: Apache-2.0
#include "wildfire/ingest.hpp"

#include "wildfire/csv.hpp"
#include "wildfire/error.hpp"
#include "wildfire/util.hpp"

#include <cmath>
#include <tuple>

namespace wildfire {

namespace {

struct PerimeterColumns {
    std::size_t year, name, alarm, cont, acres;
    std::optional<std::size_t> irwin, cause, agency, unit, c_method, objective;
};

PerimeterColumns locate_columns(const csv::Table& table) {
    auto required = [&](std::string_view canonical, std::initializer_list<std::string_view> aliases) {
        auto idx = table.find_any(aliases);
        if (!idx) fail_data("MissingColumn", std::string(canonical));
        return *idx;
    };
    PerimeterColumns cols{};
    cols.year = required("YEAR_", {"YEAR_"});
    cols.name = required("FIRE_NAME", {"FIRE_NAME", "FIRE NAME"});
    cols.alarm = required("ALARM_DATE", {"ALARM_DATE"});
    cols.cont = required("CONT_DATE", {"CONT_DATE"});
    cols.acres = required("GIS_ACRES", {"GIS_ACRES"});
    cols.irwin = table.find_any({"IRWINID", "IRWIN_ID", "IRWIN ID"});
    cols.cause = table.find_any({"CAUSE"});
    cols.agency = table.find_any({"AGENCY"});
    cols.unit = table.find_any({"UNIT_ID"});
    cols.c_method = table.find_any({"C_METHOD"});
    cols.objective = table.find_any({"OBJECTIVE"});
    return cols;
}

std::optional<std::string> text_cell(const std::vector<std::string>& row, std::optional<std::size_t> col) {
    if (!col) return std::nullopt;
    auto value = trim(row[*col]);
    if (value.empty()) return std::nullopt;
    return std::string(value);
}

std::optional<int> int_cell(const std::vector<std::string>& row, std::optional<std::size_t> col, std::size_t line,
                            std::string_view name) {
    auto text = text_cell(row, col);
    if (!text) return std::nullopt;
    auto value = parse_int(*text);
    if (!value) fail_data("MalformedCsv", "line " + std::to_string(line) + ": " + std::string(name) + " is not an integer");
    return static_cast<int>(*value);
}

template <typename Map>
std::string decode(const Map& labels, const typename Map::key_type& code, const std::string& fallback) {
    auto it = labels.find(code);
    return it == labels.end() ? fallback : it->second;
}

template <typename Map>
const std::string& decode_strict(const Map& labels, const typename Map::key_type& code, std::string_view category,
                                 const std::string& shown) {
    auto it = labels.find(code);
    if (it == labels.end()) fail_data("UnknownCode", std::string(category) + " " + shown);
    return it->second;
}

}  // namespace

std::vector<RawFireRecord> parse_perimeter_csv(std::string_view text) {
    const csv::Table table = csv::parse(text);
    const PerimeterColumns cols = locate_columns(table);

    std::vector<RawFireRecord> records;
    records.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = table.row_lines[r];
        auto fail_line = [&](const std::string& what) {
            fail_data("MalformedCsv", "line " + std::to_string(line) + ": " + what);
        };

        RawFireRecord rec;
        auto year = parse_int(row[cols.year]);
        if (!year) fail_line("YEAR_ is not an integer");
        rec.year_digitized = static_cast<int>(*year);
        rec.fire_name = row[cols.name];
        if (trim(rec.fire_name).empty()) rec.fire_name = "UNNAMED";
        rec.alarm_date_text = row[cols.alarm];
        rec.cont_date_text = row[cols.cont];
        rec.irwin_id = text_cell(row, cols.irwin);
        rec.cause_code = int_cell(row, cols.cause, line, "CAUSE");
        rec.agency_code = text_cell(row, cols.agency);
        rec.unit_id = text_cell(row, cols.unit);
        rec.c_method_code = int_cell(row, cols.c_method, line, "C_METHOD");
        rec.objective_code = int_cell(row, cols.objective, line, "OBJECTIVE");
        if (auto acres_text = text_cell(row, cols.acres)) {
            auto acres = parse_double(*acres_text);
            if (!acres || !std::isfinite(*acres) || *acres < 0) fail_line("GIS_ACRES is not a nonnegative number");
            rec.gis_acres = *acres;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string write_perimeter_csv(const std::vector<RawFireRecord>& records) {
    std::string out = csv::join_row({"YEAR_", "IRWINID", "FIRE_NAME", "ALARM_DATE", "CONT_DATE", "CAUSE", "AGENCY",
                                     "UNIT_ID", "C_METHOD", "OBJECTIVE", "GIS_ACRES"});
    auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    for (const auto& r : records) {
        out += csv::join_row({std::to_string(r.year_digitized), r.irwin_id.value_or(""), r.fire_name, r.alarm_date_text,
                              r.cont_date_text, opt_int(r.cause_code), r.agency_code.value_or(""),
                              r.unit_id.value_or(""), opt_int(r.c_method_code), opt_int(r.objective_code),
                              r.gis_acres ? format_double(*r.gis_acres) : std::string()});
    }
    return out;
}

std::string DataDictionary::cause(int code) const { return decode(cause_labels, code, "CODE_" + std::to_string(code)); }
std::string DataDictionary::c_method(int code) const {
    return decode(c_method_labels, code, "CODE_" + std::to_string(code));
}
std::string DataDictionary::agency(const std::string& code) const { return decode(agency_labels, code, "CODE_" + code); }
std::string DataDictionary::objective(int code) const {
    return decode(objective_labels, code, "CODE_" + std::to_string(code));
}

const std::string& DataDictionary::cause_at(int code) const {
    return decode_strict(cause_labels, code, "CAUSE", std::to_string(code));
}
const std::string& DataDictionary::c_method_at(int code) const {
    return decode_strict(c_method_labels, code, "C_METHOD", std::to_string(code));
}
const std::string& DataDictionary::agency_at(const std::string& code) const {
    return decode_strict(agency_labels, code, "AGENCY", code);
}
const std::string& DataDictionary::objective_at(int code) const {
    return decode_strict(objective_labels, code, "OBJECTIVE", std::to_string(code));
}

DataDictionary parse_data_dictionary(std::string_view text) {
    DataDictionary dict;
    enum class Section { None, Cause, CMethod, Agency, Objective } section = Section::None;
    std::size_t line_no = 0;

    auto int_code = [&](std::string_view code, std::string_view category) {
        auto value = parse_int(code);
        if (!value) {
            fail_data("MalformedDictionary",
                      "line " + std::to_string(line_no) + ": " + std::string(category) + " code is not an integer");
        }
        return static_cast<int>(*value);
    };
    auto insert = [&](auto& map, auto key, std::string label, std::string_view category, const std::string& shown) {
        if (!map.emplace(std::move(key), std::move(label)).second) {
            fail_data("DuplicateCode", std::string(category) + " " + shown);
        }
    };

    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail_data("MalformedDictionary", "line " + std::to_string(line_no) + ": bad section");
            const std::string name = to_upper(trim(line.substr(1, line.size() - 2)));
            if (name == "CAUSE") section = Section::Cause;
            else if (name == "C_METHOD") section = Section::CMethod;
            else if (name == "AGENCY") section = Section::Agency;
            else if (name == "OBJECTIVE") section = Section::Objective;
            else fail_data("MalformedDictionary", "line " + std::to_string(line_no) + ": unknown section " + name);
            continue;
        }

        const auto comma = line.find(',');
        if (comma == std::string_view::npos || section == Section::None) {
            fail_data("MalformedDictionary", "line " + std::to_string(line_no) + ": expected code,label in a section");
        }
        const auto code = trim(line.substr(0, comma));
        auto label_view = trim(line.substr(comma + 1));
        std::string label(label_view);
        if (label.size() >= 2 && label.front() == '"' && label.back() == '"') label = label.substr(1, label.size() - 2);

        switch (section) {
            case Section::Cause: insert(dict.cause_labels, int_code(code, "CAUSE"), label, "CAUSE", std::string(code)); break;
            case Section::CMethod:
                insert(dict.c_method_labels, int_code(code, "C_METHOD"), label, "C_METHOD", std::string(code));
                break;
            case Section::Agency: insert(dict.agency_labels, std::string(code), label, "AGENCY", std::string(code)); break;
            case Section::Objective:
                insert(dict.objective_labels, int_code(code, "OBJECTIVE"), label, "OBJECTIVE", std::string(code));
                break;
            case Section::None: break;
        }
    }

    if (dict.cause_labels.empty()) fail_data("EmptyCategory", "CAUSE");
    if (dict.c_method_labels.empty()) fail_data("EmptyCategory", "C_METHOD");
    if (dict.agency_labels.empty()) fail_data("EmptyCategory", "AGENCY");
    if (dict.objective_labels.empty()) fail_data("EmptyCategory", "OBJECTIVE");
    return dict;
}

GeometryTable parse_geometry_csv(std::string_view text) {
    const csv::Table table = csv::parse(text);
    auto required = [&](std::string_view canonical, std::initializer_list<std::string_view> aliases) {
        auto idx = table.find_any(aliases);
        if (!idx) fail_data("MissingColumn", std::string(canonical));
        return *idx;
    };
    const auto year_col = required("YEAR_", {"YEAR_", "YEAR"});
    const auto name_col = required("FIRE_NAME", {"FIRE_NAME", "FIRE NAME"});
    const auto geom_col = required("GEOMETRY", {"GEOMETRY", "WKT", "THE_GEOM", "GEOJSON"});
    const auto irwin_col = table.find_any({"IRWINID", "IRWIN_ID", "IRWIN ID"});

    GeometryTable geo;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        GeometryEntry entry;
        auto year = parse_int(row[year_col]);
        if (!year) fail_data("MalformedCsv", "line " + std::to_string(table.row_lines[r]) + ": YEAR_ is not an integer");
        entry.year = static_cast<int>(*year);
        entry.irwin_id = text_cell(row, irwin_col);
        entry.fire_name = row[name_col];
        try {
            entry.geometry = parse_polygon_text(row[geom_col]);
        } catch (const Error& e) {
            if (e.category() != ErrorCategory::Data) throw;
        }
        geo.entries.push_back(std::move(entry));
    }
    return geo;
}

JoinResult join_geometry(const std::vector<RawFireRecord>& records, const GeometryTable& geo) {
    std::map<std::pair<int, std::string>, std::vector<std::size_t>> by_irwin;
    std::map<std::pair<int, std::string>, std::vector<std::size_t>> by_name;
    for (std::size_t i = 0; i < geo.entries.size(); ++i) {
        const auto& entry = geo.entries[i];
        if (entry.irwin_id) by_irwin[{entry.year, *entry.irwin_id}].push_back(i);
        by_name[{entry.year, normalize_name(entry.fire_name)}].push_back(i);
    }

    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    JoinResult result;
    std::vector<std::size_t> chosen(records.size(), kNone);
    std::vector<bool> claimed(geo.entries.size(), false);
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& record = records[r];
        std::vector<std::size_t> candidates;
        bool keyed_by_id = false;
        if (record.irwin_id) {
            if (auto it = by_irwin.find({record.year_digitized, *record.irwin_id}); it != by_irwin.end()) {
                candidates = it->second;
                keyed_by_id = true;
            }
        }
        if (!keyed_by_id) {
            if (auto it = by_name.find({record.year_digitized, normalize_name(record.fire_name)}); it != by_name.end()) {
                for (auto idx : it->second) {
                    // A geometry carrying a different IRWIN ID is a different fire.
                    if (!record.irwin_id || !geo.entries[idx].irwin_id) candidates.push_back(idx);
                }
            }
        }

        if (candidates.empty()) {
            ++result.dropped.unmatched;
        } else if (candidates.size() > 1) {
            ++result.dropped.ambiguous;
        } else {
            chosen[r] = candidates.front();
        }
    }

    // A geometry entry joins only its first claimant.
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (chosen[r] == kNone) continue;
        if (claimed[chosen[r]]) {
            ++result.dropped.ambiguous;
            continue;
        }
        claimed[chosen[r]] = true;
        JoinedRecord joined{records[r], std::nullopt};
        const auto& entry = geo.entries[chosen[r]];
        if (entry.geometry) {
            try {
                joined.centroid = polygon_centroid(*entry.geometry);
            } catch (const Error&) {
                joined.centroid.reset();
            }
        }
        result.rows.push_back(std::move(joined));
    }
    return result;
}

}  // namespace wildfire
