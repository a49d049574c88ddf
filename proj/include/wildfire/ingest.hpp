// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/geometry.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wildfire {

/// One row of the perimeter attribute table, fields kept as exported.
struct RawFireRecord {
    int year_digitized = 0;  // YEAR_: year the perimeter was digitized
    std::optional<std::string> irwin_id;
    std::string fire_name;
    std::string alarm_date_text;
    std::string cont_date_text;
    std::optional<int> cause_code;
    std::optional<std::string> agency_code;
    std::optional<std::string> unit_id;
    std::optional<int> c_method_code;
    std::optional<int> objective_code;
    std::optional<double> gis_acres;

    bool operator==(const RawFireRecord&) const = default;
};

/// Required columns: YEAR_, FIRE_NAME, ALARM_DATE, CONT_DATE, GIS_ACRES
/// (case-insensitive). Optional: IRWINID, CAUSE, AGENCY, UNIT_ID, C_METHOD,
/// OBJECTIVE. Empty cells become absent values.
std::vector<RawFireRecord> parse_perimeter_csv(std::string_view text);
std::string write_perimeter_csv(const std::vector<RawFireRecord>& records);

struct DataDictionary {
    std::map<int, std::string> cause_labels;
    std::map<int, std::string> c_method_labels;
    std::map<std::string, std::string> agency_labels;
    std::map<int, std::string> objective_labels;

    /// Unknown codes decode to "CODE_<n>" rather than failing.
    std::string cause(int code) const;
    std::string c_method(int code) const;
    std::string agency(const std::string& code) const;
    std::string objective(int code) const;

    /// Strict lookups; throw UnknownCode.
    const std::string& cause_at(int code) const;
    const std::string& c_method_at(int code) const;
    const std::string& agency_at(const std::string& code) const;
    const std::string& objective_at(int code) const;
};

/// Sectioned code table:
///
///     [CAUSE]
///     14,Unknown / Unidentified
///     [AGENCY]
///     CDF,California Department of Forestry
///
/// Sections CAUSE, C_METHOD, AGENCY and OBJECTIVE must all be present and
/// non-empty. Blank lines and lines starting with '#' are ignored.
DataDictionary parse_data_dictionary(std::string_view text);

struct GeometryEntry {
    int year = 0;
    std::optional<std::string> irwin_id;
    std::string fire_name;
    std::optional<Geometry> geometry;  // absent when the shape failed to load
};

struct GeometryTable {
    std::vector<GeometryEntry> entries;
};

/// CSV sidecar with YEAR_, IRWINID (optional), FIRE_NAME and a GEOMETRY column
/// holding WKT or GeoJSON. Unparseable geometry is kept as a failed entry.
GeometryTable parse_geometry_csv(std::string_view text);

struct JoinedRecord {
    RawFireRecord record;
    std::optional<LatLon> centroid;  // absent when the matched geometry failed
};

struct JoinStats {
    std::size_t unmatched = 0;
    std::size_t ambiguous = 0;
};

struct JoinResult {
    std::vector<JoinedRecord> rows;
    JoinStats dropped;
};

/// Matches on (year, IRWIN ID) when both sides carry an id, falling back to
/// (year, normalized fire name). Records with zero or several candidate
/// geometries are dropped and counted. A geometry entry joins only the first
/// record that resolves to it; later claimants count as ambiguous. Output
/// order follows `records`.
JoinResult join_geometry(const std::vector<RawFireRecord>& records, const GeometryTable& geo);

}  // namespace wildfire
