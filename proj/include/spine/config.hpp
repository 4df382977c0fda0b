#pragma once

#include "spine/geometry.hpp"
#include "spine/montecarlo.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace spine {

/// Flat "key = value" file. '#' starts a comment, blank lines are ignored,
/// ':' is accepted in place of '='. Keys are case sensitive.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::optional<std::string> text(const std::string& key) const;
    std::optional<double> number(const std::string& key) const;
    std::optional<std::uint64_t> integer(const std::string& key) const;

private:
    std::map<std::string, std::string> values_;
};

enum class NeckShape { Straight, Curved, None, Channel };

/// Geometry keys: head_radius, eps, neck = straight|curved|none|channel, L
/// (straight), l, r1, r2, arc_radii = centerline|inner_wall (curved), alpha,
/// beta (Robin window; neck = none).
struct GeometryConfig {
    double head_radius = 1.0;
    double eps = 0.1;
    NeckShape neck = NeckShape::Straight;
    double L = 1.0;
    double l = 1.0;
    double r1 = 1.0;
    double r2 = 1.0;
    ArcRadii radii = ArcRadii::Centerline;
    std::optional<double> alpha;
    std::optional<double> beta;
};

/// Reads the geometry keys; unknown keys are left for other readers.
/// Malformed values throw ConfigError.
GeometryConfig geometry_config(const KeyValueConfig& kv, GeometryConfig base = {});

/// Head-only domains without alpha/beta use robin_coefficients(L).
SpineGeometry build_geometry(const GeometryConfig& c);

/// dt, walkers, seed, max_steps on top of `base`.
WalkConfig walk_config(const KeyValueConfig& kv, WalkConfig base = {});

/// Throws ConfigError naming the first key outside the known geometry and
/// walk keys.
void check_known_keys(const KeyValueConfig& kv);

/// "key = value" lines that rebuild `c`.
std::string describe(const GeometryConfig& c);

/// Closed boundary polyline as "x,y,piece_kind" rows; the first point is
/// repeated at the end.
void write_polyline_csv(std::ostream& os, const SpineGeometry& g, double chord_error, int digits = 10);

} // namespace spine
