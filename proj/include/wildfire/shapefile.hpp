// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wildfire/ingest.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wildfire::shapefile {

struct DbfField {
    std::string name;
    char type = 'C';
    std::uint8_t length = 0;
    std::uint8_t decimals = 0;
};

struct DbfTable {
    std::vector<DbfField> fields;
    std::vector<std::vector<std::string>> records;  // trimmed cell text
    std::vector<bool> deleted;
};

/// dBASE III (version byte 0x03) with C, N, F and D fields.
DbfTable read_dbf(std::span<const std::uint8_t> bytes);

/// Shape records of a Polygon (5) or PolygonZ (15) file, Z dropped.
/// Null shapes and structurally broken records come back as std::nullopt.
std::vector<std::optional<Geometry>> read_shp(std::span<const std::uint8_t> bytes);

/// Joins the two files by record index and pulls YEAR_, IRWINID and
/// FIRE_NAME from the attribute table. Throws BadMagic,
/// UnsupportedShapeType or RecordCountMismatch.
GeometryTable read_shapefile_subset(std::span<const std::uint8_t> shp, std::span<const std::uint8_t> dbf);

}  // namespace wildfire::shapefile
