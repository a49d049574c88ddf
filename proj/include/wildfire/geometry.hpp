// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <variant>
#include <vector>

namespace wildfire {

/// Planar point in degrees: x is longitude, y is latitude.
struct Point {
    double x = 0;
    double y = 0;
    bool operator==(const Point&) const = default;
};

/// Closed ring: at least four points, first == last.
using Ring = std::vector<Point>;

/// First ring is the outer boundary, the rest are holes.
struct Polygon {
    std::vector<Ring> rings;
    bool operator==(const Polygon&) const = default;
};

struct MultiPolygon {
    std::vector<Polygon> parts;
    bool operator==(const MultiPolygon&) const = default;
};

using Geometry = std::variant<Polygon, MultiPolygon>;

struct LatLon {
    double latitude = 0;
    double longitude = 0;
};

/// Parses WKT POLYGON / MULTIPOLYGON or a GeoJSON Polygon / MultiPolygon
/// object. Rings are never auto-closed; an open ring is a ParseError.
/// Other geometry kinds raise UnsupportedGeometry.
Geometry parse_polygon_text(std::string_view text);

/// Throws InvalidGeometry unless every ring is closed, has at least four
/// points and finite coordinates.
void validate(const Geometry& geometry);

/// Signed shoelace area (counter-clockwise positive).
double signed_area(const Ring& ring) noexcept;

/// Area-weighted planar centroid. Outer rings add and holes subtract their
/// absolute area; when the net area is below 1e-12 square degrees the mean of
/// the outer-ring vertices (closing vertex excluded) is returned instead.
LatLon polygon_centroid(const Geometry& geometry);

}  // namespace wildfire
