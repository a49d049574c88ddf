// SPDX-License-Identifier: Apache-2.0
#include "wildfire/shapefile.hpp"

#include "wildfire/error.hpp"
#include "wildfire/util.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace wildfire::shapefile {

namespace {

constexpr std::int32_t kFileCode = 9994;
constexpr std::int32_t kVersion = 1000;
constexpr std::int32_t kNullShape = 0;
constexpr std::int32_t kPolygon = 5;
constexpr std::int32_t kPolygonZ = 15;

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    bool has(std::size_t offset, std::size_t n) const { return offset <= bytes_.size() && n <= bytes_.size() - offset; }

    std::int32_t int_be(std::size_t offset) const {
        check(offset, 4);
        return static_cast<std::int32_t>(std::uint32_t(bytes_[offset]) << 24 | std::uint32_t(bytes_[offset + 1]) << 16 |
                                         std::uint32_t(bytes_[offset + 2]) << 8 | std::uint32_t(bytes_[offset + 3]));
    }

    std::int32_t int_le(std::size_t offset) const {
        check(offset, 4);
        return static_cast<std::int32_t>(std::uint32_t(bytes_[offset]) | std::uint32_t(bytes_[offset + 1]) << 8 |
                                         std::uint32_t(bytes_[offset + 2]) << 16 |
                                         std::uint32_t(bytes_[offset + 3]) << 24);
    }

    std::uint16_t u16_le(std::size_t offset) const {
        check(offset, 2);
        return static_cast<std::uint16_t>(bytes_[offset] | bytes_[offset + 1] << 8);
    }

    double double_le(std::size_t offset) const {
        check(offset, 8);
        std::uint64_t raw = 0;
        for (int i = 7; i >= 0; --i) raw = raw << 8 | bytes_[offset + static_cast<std::size_t>(i)];
        return std::bit_cast<double>(raw);
    }

    std::size_t size() const { return bytes_.size(); }
    std::uint8_t at(std::size_t offset) const {
        check(offset, 1);
        return bytes_[offset];
    }

private:
    void check(std::size_t offset, std::size_t n) const {
        if (!has(offset, n)) fail_data("TruncatedFile", "read past end at offset " + std::to_string(offset));
    }

    std::span<const std::uint8_t> bytes_;
};

std::optional<Geometry> decode_polygon(const ByteReader& in, std::size_t offset, std::size_t content_bytes) {
    // Layout after the shape type: bbox (4 doubles), numParts, numPoints,
    // parts[numParts], points[numPoints] as (x, y) doubles. PolygonZ appends
    // Z range + Z values (+ optional M), which are ignored.
    if (content_bytes < 44) return std::nullopt;
    const std::int32_t num_parts = in.int_le(offset + 36);
    const std::int32_t num_points = in.int_le(offset + 40);
    if (num_parts <= 0 || num_points <= 0) return std::nullopt;
    const std::size_t parts_at = offset + 44;
    const std::size_t points_at = parts_at + 4 * static_cast<std::size_t>(num_parts);
    if (points_at + 16 * static_cast<std::size_t>(num_points) > offset + content_bytes) return std::nullopt;

    std::vector<std::int32_t> starts(static_cast<std::size_t>(num_parts));
    for (std::size_t p = 0; p < starts.size(); ++p) starts[p] = in.int_le(parts_at + 4 * p);

    std::vector<Ring> rings;
    for (std::size_t p = 0; p < starts.size(); ++p) {
        const std::int32_t begin = starts[p];
        const std::int32_t end = p + 1 < starts.size() ? starts[p + 1] : num_points;
        if (begin < 0 || end > num_points || end - begin < 4) return std::nullopt;
        Ring ring;
        for (std::int32_t i = begin; i < end; ++i) {
            const std::size_t at = points_at + 16 * static_cast<std::size_t>(i);
            ring.push_back({in.double_le(at), in.double_le(at + 8)});
        }
        rings.push_back(std::move(ring));
    }

    // Clockwise rings are outer boundaries; counter-clockwise rings are holes
    // of the preceding outer ring.
    MultiPolygon multi;
    for (auto& ring : rings) {
        if (signed_area(ring) <= 0 || multi.parts.empty()) {
            multi.parts.push_back(Polygon{{std::move(ring)}});
        } else {
            multi.parts.back().rings.push_back(std::move(ring));
        }
    }
    Geometry geometry = multi.parts.size() == 1 ? Geometry{std::move(multi.parts.front())} : Geometry{std::move(multi)};
    try {
        validate(geometry);
    } catch (const Error&) {
        return std::nullopt;
    }
    return geometry;
}

}  // namespace

DbfTable read_dbf(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes);
    if (!in.has(0, 32)) fail_data("TruncatedFile", "dbf header shorter than 32 bytes");
    if (in.at(0) != 0x03) fail_data("BadMagic", "dbf version byte is not 0x03");
    const auto record_count = static_cast<std::uint32_t>(in.int_le(4));
    const std::size_t header_length = in.u16_le(8);
    const std::size_t record_length = in.u16_le(10);

    DbfTable table;
    std::size_t offset = 32;
    std::size_t width = 1;  // deletion flag
    while (offset < header_length && in.at(offset) != 0x0D) {
        if (!in.has(offset, 32)) fail_data("TruncatedFile", "dbf field descriptor truncated");
        DbfField field;
        for (std::size_t i = 0; i < 11 && bytes[offset + i] != 0; ++i) field.name.push_back(static_cast<char>(bytes[offset + i]));
        field.type = static_cast<char>(in.at(offset + 11));
        field.length = in.at(offset + 16);
        field.decimals = in.at(offset + 17);
        if (field.type != 'C' && field.type != 'N' && field.type != 'F' && field.type != 'D') {
            fail_data("UnsupportedFieldType", std::string(1, field.type) + " for field " + field.name);
        }
        width += field.length;
        table.fields.push_back(std::move(field));
        offset += 32;
    }
    if (width != record_length) fail_data("MalformedDbf", "record length does not match field widths");

    for (std::uint32_t r = 0; r < record_count; ++r) {
        const std::size_t base = header_length + static_cast<std::size_t>(r) * record_length;
        if (!in.has(base, record_length)) fail_data("TruncatedFile", "dbf record " + std::to_string(r) + " truncated");
        table.deleted.push_back(in.at(base) == '*');
        std::vector<std::string> cells;
        std::size_t at = base + 1;
        for (const auto& field : table.fields) {
            std::string_view raw(reinterpret_cast<const char*>(bytes.data() + at), field.length);
            cells.emplace_back(trim(raw));
            at += field.length;
        }
        table.records.push_back(std::move(cells));
    }
    return table;
}

std::vector<std::optional<Geometry>> read_shp(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes);
    if (!in.has(0, 100)) fail_data("BadMagic", "shp header shorter than 100 bytes");
    if (in.int_be(0) != kFileCode) fail_data("BadMagic", "file code is not 9994");
    if (in.int_le(28) != kVersion) fail_data("BadMagic", "version is not 1000");
    const std::int32_t shape_type = in.int_le(32);
    if (shape_type != kPolygon && shape_type != kPolygonZ) {
        fail_data("UnsupportedShapeType", std::to_string(shape_type));
    }
    const std::size_t file_bytes = std::min<std::size_t>(2 * static_cast<std::size_t>(in.int_be(24)), in.size());

    std::vector<std::optional<Geometry>> out;
    std::size_t offset = 100;
    while (offset + 8 <= file_bytes) {
        const std::size_t content_bytes = 2 * static_cast<std::size_t>(in.int_be(offset + 4));
        const std::size_t content_at = offset + 8;
        if (content_at + content_bytes > file_bytes || content_bytes < 4) {
            fail_data("TruncatedFile", "shape record at offset " + std::to_string(offset) + " truncated");
        }
        const std::int32_t record_type = in.int_le(content_at);
        if (record_type == kNullShape) {
            out.emplace_back(std::nullopt);
        } else if (record_type != shape_type) {
            fail_data("UnsupportedShapeType", std::to_string(record_type));
        } else {
            out.push_back(decode_polygon(in, content_at, content_bytes));
        }
        offset = content_at + content_bytes;
    }
    return out;
}

GeometryTable read_shapefile_subset(std::span<const std::uint8_t> shp, std::span<const std::uint8_t> dbf) {
    auto shapes = read_shp(shp);
    const DbfTable table = read_dbf(dbf);
    if (shapes.size() != table.records.size()) {
        fail_data("RecordCountMismatch",
                  std::to_string(shapes.size()) + " shapes vs " + std::to_string(table.records.size()) + " records");
    }

    auto column = [&](std::initializer_list<std::string_view> names) -> std::optional<std::size_t> {
        for (auto name : names) {
            for (std::size_t i = 0; i < table.fields.size(); ++i) {
                if (iequals(table.fields[i].name, name)) return i;
            }
        }
        return std::nullopt;
    };
    const auto year_col = column({"YEAR_", "YEAR"});
    const auto irwin_col = column({"IRWINID", "IRWIN_ID", "IRWIN ID"});
    const auto name_col = column({"FIRE_NAME", "FIRE NAME", "FIRENAME"});
    if (!year_col) fail_data("MissingColumn", "YEAR_");
    if (!name_col) fail_data("MissingColumn", "FIRE_NAME");

    GeometryTable geo;
    for (std::size_t r = 0; r < shapes.size(); ++r) {
        const auto& cells = table.records[r];
        GeometryEntry entry;
        entry.year = static_cast<int>(parse_int(cells[*year_col]).value_or(0));
        if (irwin_col && !cells[*irwin_col].empty()) entry.irwin_id = cells[*irwin_col];
        entry.fire_name = cells[*name_col];
        if (!table.deleted[r]) entry.geometry = std::move(shapes[r]);
        geo.entries.push_back(std::move(entry));
    }
    return geo;
}

}  // namespace wildfire::shapefile
