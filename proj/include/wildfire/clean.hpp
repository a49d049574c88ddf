// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/ingest.hpp"

#include <chrono>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace wildfire {

using Date = std::chrono::year_month_day;

/// Accepts YYYY-MM-DD (an ISO time suffix after 'T' or ' ' is discarded) and
/// YYYY/MM/DD. Anything else, including two-digit years, throws
/// UnparseableDate.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);
int day_of_year(const Date& date);
/// Days since 1970-01-01.
int day_number(const Date& date);

/// California bounding box used to flag implausible centroids.
inline constexpr double kMinLatitude = 32.0;
inline constexpr double kMaxLatitude = 43.0;
inline constexpr double kMinLongitude = -125.0;
inline constexpr double kMaxLongitude = -114.0;

struct FireRecord {
    RawFireRecord raw;
    Date alarm_date;
    Date cont_date;
    double latitude = 0;
    double longitude = 0;
    int containment_days = 0;
    double log_cont_days = 0;
};

struct DurationTarget {
    int containment_days = 0;
    double log_cont_days = 0;
};

/// Calendar-day difference and its log1p. Throws NegativeDuration when
/// cont < alarm.
DurationTarget derive_target(const Date& alarm, const Date& cont);

namespace drop_reason {
inline constexpr const char* kUnparseableDate = "unparseable_date";
inline constexpr const char* kContBeforeAlarm = "cont_before_alarm";
inline constexpr const char* kDuplicateKey = "duplicate_key";
inline constexpr const char* kMissingGeometry = "missing_geometry";
inline constexpr const char* kMissingAcres = "missing_acres";
inline constexpr const char* kOutOfBounds = "out_of_bounds";
}  // namespace drop_reason

struct CleanReport {
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
    std::map<std::string, std::size_t> dropped_by_reason;  // every reason present, zero if unused

    std::size_t dropped_total() const;
};

struct CleanResult {
    std::vector<FireRecord> records;
    CleanReport report;
};

/// Date parse, chronology check, duplicate removal (first occurrence kept;
/// keyed on IRWIN ID, else year + normalized name + alarm date), missing
/// geometry, missing acres, then the bounding-box check. Output order follows
/// input order.
CleanResult clean_records(const std::vector<JoinedRecord>& rows);

/// Turns cleaned records back into joined rows (dates in ISO form).
std::vector<JoinedRecord> to_joined(const std::vector<FireRecord>& records);

struct StatsRow {
    std::string variable;
    std::size_t count = 0;
    double mean = 0, std = 0, min = 0, p25 = 0, p50 = 0, p75 = 0, max = 0;
};

struct StatsTable {
    std::vector<StatsRow> rows;  // containment_days, log_cont_days, gis_acres, log_acres
};

/// Sample std (n-1; 0 for a single value) and linearly interpolated
/// percentiles. Throws EmptyDataset.
StatsRow summarize(std::string variable, std::vector<double> values);
StatsTable descriptive_stats(const std::vector<FireRecord>& records);

std::string stats_to_csv(const StatsTable& stats);
std::string clean_report_to_json(const CleanReport& report, const JoinStats& join);

/// Cleaned dataset CSV: the perimeter columns followed by LATITUDE,
/// LONGITUDE, CONTAINMENT_DAYS, LOG_CONT_DAYS and, when a dictionary is
/// given, decoded *_LABEL columns.
std::string write_cleaned_csv(const std::vector<FireRecord>& records, const DataDictionary* dictionary = nullptr);

/// Reads the cleaned layout. With `require_target` false, rows may leave
/// CONT_DATE empty (prediction input); their target fields are zero.
std::vector<FireRecord> read_cleaned_csv(std::string_view text, bool require_target = true);

}  // namespace wildfire
