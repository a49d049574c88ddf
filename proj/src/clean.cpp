// SPDX-License-Identifier: Apache-2.0
#include "wildfire/clean.hpp"

#include "wildfire/csv.hpp"
#include "wildfire/error.hpp"
#include "wildfire/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace wildfire {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

Date parse_date(std::string_view text) {
    const auto original = text;
    text = trim(text);
    if (auto cut = text.find_first_of("T "); cut != std::string_view::npos) text = text.substr(0, cut);

    auto fail = [&] { fail_data("UnparseableDate", std::string(original)); };
    if (text.size() != 10) fail();
    const char sep = text[4];
    if ((sep != '-' && sep != '/') || text[7] != sep) fail();
    const auto y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) fail();

    const Date date{std::chrono::year{static_cast<int>(*parse_int(y))},
                    std::chrono::month{static_cast<unsigned>(*parse_int(m))},
                    std::chrono::day{static_cast<unsigned>(*parse_int(d))}};
    if (!date.ok()) fail();
    return date;
}

std::string format_date(const Date& date) {
    char buffer[16];
    std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buffer;
}

int day_of_year(const Date& date) {
    const std::chrono::sys_days start{date.year() / std::chrono::January / 1};
    return (std::chrono::sys_days{date} - start).count() + 1;
}

int day_number(const Date& date) { return std::chrono::sys_days{date}.time_since_epoch().count(); }

DurationTarget derive_target(const Date& alarm, const Date& cont) {
    const int days = day_number(cont) - day_number(alarm);
    if (days < 0) fail_data("NegativeDuration", format_date(alarm) + " > " + format_date(cont));
    return {days, std::log1p(static_cast<double>(days))};
}

std::size_t CleanReport::dropped_total() const {
    std::size_t total = 0;
    for (const auto& [reason, count] : dropped_by_reason) total += count;
    return total;
}

CleanResult clean_records(const std::vector<JoinedRecord>& rows) {
    CleanResult result;
    auto& report = result.report;
    report.rows_in = rows.size();
    for (const char* reason : {drop_reason::kUnparseableDate, drop_reason::kContBeforeAlarm, drop_reason::kDuplicateKey,
                               drop_reason::kMissingGeometry, drop_reason::kMissingAcres, drop_reason::kOutOfBounds}) {
        report.dropped_by_reason[reason] = 0;
    }

    std::set<std::string> seen_keys;
    for (const auto& row : rows) {
        const auto& raw = row.record;
        FireRecord rec;
        rec.raw = raw;
        try {
            rec.alarm_date = parse_date(raw.alarm_date_text);
            rec.cont_date = parse_date(raw.cont_date_text);
        } catch (const Error&) {
            ++report.dropped_by_reason[drop_reason::kUnparseableDate];
            continue;
        }
        if (day_number(rec.cont_date) < day_number(rec.alarm_date)) {
            ++report.dropped_by_reason[drop_reason::kContBeforeAlarm];
            continue;
        }
        const std::string key = raw.irwin_id ? "I:" + *raw.irwin_id
                                             : "N:" + std::to_string(raw.year_digitized) + "|" +
                                                   normalize_name(raw.fire_name) + "|" + format_date(rec.alarm_date);
        if (!seen_keys.insert(key).second) {
            ++report.dropped_by_reason[drop_reason::kDuplicateKey];
            continue;
        }
        if (!row.centroid) {
            ++report.dropped_by_reason[drop_reason::kMissingGeometry];
            continue;
        }
        if (!raw.gis_acres) {
            ++report.dropped_by_reason[drop_reason::kMissingAcres];
            continue;
        }
        rec.latitude = row.centroid->latitude;
        rec.longitude = row.centroid->longitude;
        if (!(rec.latitude >= kMinLatitude && rec.latitude <= kMaxLatitude && rec.longitude >= kMinLongitude &&
              rec.longitude <= kMaxLongitude)) {
            ++report.dropped_by_reason[drop_reason::kOutOfBounds];
            continue;
        }
        const auto target = derive_target(rec.alarm_date, rec.cont_date);
        rec.containment_days = target.containment_days;
        rec.log_cont_days = target.log_cont_days;
        result.records.push_back(std::move(rec));
    }
    report.rows_out = result.records.size();
    return result;
}

std::vector<JoinedRecord> to_joined(const std::vector<FireRecord>& records) {
    std::vector<JoinedRecord> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        JoinedRecord row{rec.raw, LatLon{rec.latitude, rec.longitude}};
        row.record.alarm_date_text = format_date(rec.alarm_date);
        row.record.cont_date_text = format_date(rec.cont_date);
        out.push_back(std::move(row));
    }
    return out;
}

StatsRow summarize(std::string variable, std::vector<double> values) {
    if (values.empty()) fail_data("EmptyDataset", "no values for " + variable);
    std::sort(values.begin(), values.end());
    StatsRow row;
    row.variable = std::move(variable);
    row.count = values.size();
    const double n = static_cast<double>(values.size());
    double sum = 0;
    for (double v : values) sum += v;
    row.mean = sum / n;
    double ss = 0;
    for (double v : values) ss += (v - row.mean) * (v - row.mean);
    row.std = values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;

    auto percentile = [&](double q) {
        const double pos = q * (n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    row.min = values.front();
    row.p25 = percentile(0.25);
    row.p50 = percentile(0.50);
    row.p75 = percentile(0.75);
    row.max = values.back();
    return row;
}

StatsTable descriptive_stats(const std::vector<FireRecord>& records) {
    if (records.empty()) fail_data("EmptyDataset", "no records to summarize");
    std::vector<double> days, log_days, acres, log_acres;
    for (const auto& r : records) {
        days.push_back(r.containment_days);
        log_days.push_back(r.log_cont_days);
        const double a = r.raw.gis_acres.value_or(0.0);
        acres.push_back(a);
        log_acres.push_back(std::log1p(a));
    }
    StatsTable table;
    table.rows.push_back(summarize("containment_days", std::move(days)));
    table.rows.push_back(summarize("log_cont_days", std::move(log_days)));
    table.rows.push_back(summarize("gis_acres", std::move(acres)));
    table.rows.push_back(summarize("log_acres", std::move(log_acres)));
    return table;
}

std::string stats_to_csv(const StatsTable& stats) {
    std::string out = csv::join_row({"variable", "count", "mean", "std", "min", "p25", "p50", "p75", "max"});
    for (const auto& r : stats.rows) {
        out += csv::join_row({r.variable, std::to_string(r.count), format_fixed(r.mean, 4), format_fixed(r.std, 4),
                              format_fixed(r.min, 4), format_fixed(r.p25, 4), format_fixed(r.p50, 4),
                              format_fixed(r.p75, 4), format_fixed(r.max, 4)});
    }
    return out;
}

std::string clean_report_to_json(const CleanReport& report, const JoinStats& join) {
    nlohmann::ordered_json doc;
    doc["rows_in"] = report.rows_in;
    doc["rows_out"] = report.rows_out;
    doc["dropped_by_reason"] = report.dropped_by_reason;
    doc["join_dropped"] = {{"unmatched", join.unmatched}, {"ambiguous", join.ambiguous}};
    return doc.dump(2) + "\n";
}

std::string write_cleaned_csv(const std::vector<FireRecord>& records, const DataDictionary* dictionary) {
    std::vector<std::string> header{"YEAR_",     "IRWINID",   "FIRE_NAME", "ALARM_DATE", "CONT_DATE",
                                    "CAUSE",     "AGENCY",    "UNIT_ID",   "C_METHOD",   "OBJECTIVE",
                                    "GIS_ACRES", "LATITUDE",  "LONGITUDE", "CONTAINMENT_DAYS", "LOG_CONT_DAYS"};
    if (dictionary) {
        for (const char* extra : {"CAUSE_LABEL", "AGENCY_LABEL", "C_METHOD_LABEL", "OBJECTIVE_LABEL"}) {
            header.emplace_back(extra);
        }
    }
    std::string out = csv::join_row(header);
    auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    for (const auto& r : records) {
        const auto& raw = r.raw;
        std::vector<std::string> row{std::to_string(raw.year_digitized),
                                     raw.irwin_id.value_or(""),
                                     raw.fire_name,
                                     format_date(r.alarm_date),
                                     format_date(r.cont_date),
                                     opt_int(raw.cause_code),
                                     raw.agency_code.value_or(""),
                                     raw.unit_id.value_or(""),
                                     opt_int(raw.c_method_code),
                                     opt_int(raw.objective_code),
                                     raw.gis_acres ? format_double(*raw.gis_acres) : std::string(),
                                     format_double(r.latitude),
                                     format_double(r.longitude),
                                     std::to_string(r.containment_days),
                                     format_double(r.log_cont_days)};
        if (dictionary) {
            row.push_back(raw.cause_code ? dictionary->cause(*raw.cause_code) : "");
            row.push_back(raw.agency_code ? dictionary->agency(*raw.agency_code) : "");
            row.push_back(raw.c_method_code ? dictionary->c_method(*raw.c_method_code) : "");
            row.push_back(raw.objective_code ? dictionary->objective(*raw.objective_code) : "");
        }
        out += csv::join_row(row);
    }
    return out;
}

std::vector<FireRecord> read_cleaned_csv(std::string_view text, bool require_target) {
    auto raws = parse_perimeter_csv(text);
    const csv::Table table = csv::parse(text);
    const auto lat_col = table.find("LATITUDE");
    const auto lon_col = table.find("LONGITUDE");
    if (!lat_col) fail_data("MissingColumn", "LATITUDE");
    if (!lon_col) fail_data("MissingColumn", "LONGITUDE");

    std::vector<FireRecord> records;
    records.reserve(raws.size());
    for (std::size_t i = 0; i < raws.size(); ++i) {
        const std::size_t line = table.row_lines[i];
        auto bad = [&](const std::string& what) {
            fail_data("MalformedCsv", "line " + std::to_string(line) + ": " + what);
        };
        FireRecord rec;
        rec.raw = std::move(raws[i]);
        rec.alarm_date = parse_date(rec.raw.alarm_date_text);
        const auto lat = parse_double(table.rows[i][*lat_col]);
        const auto lon = parse_double(table.rows[i][*lon_col]);
        if (!lat || !lon || !std::isfinite(*lat) || !std::isfinite(*lon)) bad("LATITUDE/LONGITUDE must be numbers");
        rec.latitude = *lat;
        rec.longitude = *lon;
        if (!rec.raw.gis_acres) bad("GIS_ACRES is required");
        if (trim(rec.raw.cont_date_text).empty() && !require_target) {
            rec.cont_date = rec.alarm_date;
        } else {
            rec.cont_date = parse_date(rec.raw.cont_date_text);
            const auto target = derive_target(rec.alarm_date, rec.cont_date);
            rec.containment_days = target.containment_days;
            rec.log_cont_days = target.log_cont_days;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace wildfire
