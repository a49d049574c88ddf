// SPDX-License-Identifier: Apache-2.0
#include "wildfire/geometry.hpp"

#include "wildfire/error.hpp"
#include "wildfire/util.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <string>

namespace wildfire {

namespace {

class WktReader {
public:
    explicit WktReader(std::string_view text) : text_(text) {}

    Geometry read() {
        const std::string tag = keyword();
        if (tag.empty()) error("expected geometry keyword");
        Geometry out;
        if (tag == "POLYGON") {
            skip_dimension_tag();
            out = polygon();
        } else if (tag == "MULTIPOLYGON") {
            skip_dimension_tag();
            MultiPolygon multi;
            expect('(');
            do {
                multi.parts.push_back(polygon());
            } while (accept(','));
            expect(')');
            out = std::move(multi);
        } else {
            fail_data("UnsupportedGeometry", tag);
        }
        skip_space();
        if (pos_ != text_.size()) error("trailing characters");
        return out;
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        fail_data("ParseError", "position " + std::to_string(pos_) + ": " + what);
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string keyword() {
        skip_space();
        std::string word;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
            word.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(text_[pos_]))));
            ++pos_;
        }
        return word;
    }

    // "POLYGON Z (...)" carries a third ordinate, which is dropped.
    void skip_dimension_tag() {
        const auto saved = pos_;
        const std::string tag = keyword();
        if (tag == "Z" || tag == "M" || tag == "ZM") {
            return;
        }
        if (!tag.empty()) {
            pos_ = saved;
            error("unexpected keyword " + tag);
        }
        pos_ = saved;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) error(std::string("expected '") + c + "'");
    }

    double number() {
        skip_space();
        const auto start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-' || text_[pos_] == '+' ||
                text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
            ++pos_;
        }
        auto value = parse_double(text_.substr(start, pos_ - start));
        if (!value) {
            pos_ = start;
            error("expected number");
        }
        return *value;
    }

    Ring ring() {
        expect('(');
        Ring out;
        do {
            const double x = number();
            const double y = number();
            // Z/M ordinates are read and dropped.
            skip_space();
            while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')') {
                number();
                skip_space();
            }
            out.push_back({x, y});
        } while (accept(','));
        expect(')');
        if (out.size() < 4) error("ring needs at least 4 points");
        if (!(out.front() == out.back())) error("ring is not closed");
        return out;
    }

    Polygon polygon() {
        expect('(');
        Polygon out;
        do {
            out.rings.push_back(ring());
        } while (accept(','));
        expect(')');
        return out;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

Ring geojson_ring(const nlohmann::json& coords) {
    if (!coords.is_array()) fail_data("ParseError", "GeoJSON ring is not an array");
    Ring out;
    for (const auto& pair : coords) {
        if (!pair.is_array() || pair.size() < 2 || !pair[0].is_number() || !pair[1].is_number()) {
            fail_data("ParseError", "GeoJSON position must be [x, y]");
        }
        out.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    if (out.size() < 4) fail_data("ParseError", "GeoJSON ring needs at least 4 positions");
    if (!(out.front() == out.back())) fail_data("ParseError", "GeoJSON ring is not closed");
    return out;
}

Polygon geojson_polygon(const nlohmann::json& coords) {
    if (!coords.is_array() || coords.empty()) fail_data("ParseError", "GeoJSON polygon needs rings");
    Polygon out;
    for (const auto& ring : coords) out.rings.push_back(geojson_ring(ring));
    return out;
}

Geometry parse_geojson(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail_data("ParseError", "position " + std::to_string(e.byte) + ": invalid GeoJSON");
    }
    if (doc.contains("geometry") && doc.value("type", "") == "Feature") doc = doc["geometry"];
    const std::string type = doc.value("type", "");
    if (!doc.contains("coordinates")) {
        if (type.empty()) fail_data("ParseError", "position 0: GeoJSON object has no type");
        fail_data("UnsupportedGeometry", type);
    }
    const auto& coords = doc["coordinates"];
    if (type == "Polygon") return geojson_polygon(coords);
    if (type == "MultiPolygon") {
        if (!coords.is_array() || coords.empty()) fail_data("ParseError", "GeoJSON multipolygon needs parts");
        MultiPolygon multi;
        for (const auto& part : coords) multi.parts.push_back(geojson_polygon(part));
        return multi;
    }
    fail_data("UnsupportedGeometry", type.empty() ? "unknown" : type);
}

template <typename Fn>
void for_each_polygon(const Geometry& geometry, Fn&& fn) {
    if (const auto* poly = std::get_if<Polygon>(&geometry)) {
        fn(*poly);
    } else {
        for (const auto& part : std::get<MultiPolygon>(geometry).parts) fn(part);
    }
}

}  // namespace

Geometry parse_polygon_text(std::string_view text) {
    const auto body = trim(text);
    Geometry out = !body.empty() && body.front() == '{' ? parse_geojson(body) : WktReader(body).read();
    validate(out);
    return out;
}

void validate(const Geometry& geometry) {
    bool any = false;
    for_each_polygon(geometry, [&](const Polygon& poly) {
        if (poly.rings.empty()) fail_data("InvalidGeometry", "polygon without rings");
        for (const auto& ring : poly.rings) {
            if (ring.size() < 4) fail_data("InvalidGeometry", "ring with fewer than 4 points");
            if (!(ring.front() == ring.back())) fail_data("InvalidGeometry", "ring not closed");
            for (const auto& p : ring) {
                if (!std::isfinite(p.x) || !std::isfinite(p.y)) fail_data("InvalidGeometry", "non-finite coordinate");
            }
        }
        any = true;
    });
    if (!any) fail_data("InvalidGeometry", "empty multipolygon");
}

double signed_area(const Ring& ring) noexcept {
    double twice = 0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        twice += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
    }
    return 0.5 * twice;
}

LatLon polygon_centroid(const Geometry& geometry) {
    // Accumulate relative to the first vertex so that large coordinate offsets
    // do not cost precision (and translation equivariance stays exact enough).
    Point origin{};
    bool have_origin = false;
    for_each_polygon(geometry, [&](const Polygon& poly) {
        if (!have_origin && !poly.rings.empty() && !poly.rings.front().empty()) {
            origin = poly.rings.front().front();
            have_origin = true;
        }
    });

    double area_total = 0, cx_total = 0, cy_total = 0;
    double mean_x = 0, mean_y = 0;
    std::size_t mean_count = 0;

    for_each_polygon(geometry, [&](const Polygon& poly) {
        for (std::size_t r = 0; r < poly.rings.size(); ++r) {
            const auto& ring = poly.rings[r];
            double twice = 0, cx = 0, cy = 0;
            for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
                const double x0 = ring[i].x - origin.x, y0 = ring[i].y - origin.y;
                const double x1 = ring[i + 1].x - origin.x, y1 = ring[i + 1].y - origin.y;
                const double cross = x0 * y1 - x1 * y0;
                twice += cross;
                cx += (x0 + x1) * cross;
                cy += (y0 + y1) * cross;
            }
            // Orient each ring so outer rings count positive and holes negative.
            const double sign = ((twice >= 0) == (r == 0)) ? 1.0 : -1.0;
            area_total += sign * 0.5 * twice;
            cx_total += sign * cx / 6.0;
            cy_total += sign * cy / 6.0;
            if (r == 0) {
                for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
                    mean_x += ring[i].x - origin.x;
                    mean_y += ring[i].y - origin.y;
                    ++mean_count;
                }
            }
        }
    });

    if (std::fabs(area_total) >= 1e-12) {
        return {origin.y + cy_total / area_total, origin.x + cx_total / area_total};
    }
    if (mean_count == 0) fail_data("DegenerateGeometry", "no outer-ring vertices");
    return {origin.y + mean_y / static_cast<double>(mean_count), origin.x + mean_x / static_cast<double>(mean_count)};
}

}  // namespace wildfire
