#pragma once

#include "spine/vec2.hpp"

#include <numbers>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace spine {

enum class BoundaryKind { Reflecting, Absorbing, Robin };

std::string_view to_string(BoundaryKind kind);

struct Segment {
    Vec2 a;
    Vec2 b;
};

/// Circular arc traversed from `start_angle` through the signed `sweep`
/// (positive = counterclockwise).
struct Arc {
    Vec2 center;
    double radius = 1.0;
    double start_angle = 0.0;
    double sweep = 0.0;
};

using Curve = std::variant<Segment, Arc>;

double length(const Curve& c);
Vec2 point_at(const Curve& c, double s);
Vec2 tangent_at(const Curve& c, double s);
Vec2 start_point(const Curve& c);
Vec2 end_point(const Curve& c);
double distance_to(const Curve& c, Vec2 p);

/// Smallest parameter t in (t_min, 1] at which the segment p + t (q - p)
/// meets the curve, if any.
std::optional<double> first_crossing(const Curve& c, Vec2 p, Vec2 q, double t_min = 0.0);

/// All parameters t in (t_min, 1], ascending, at which p + t (q - p) meets
/// the curve; returns how many (at most two).
int crossing_parameters(const Curve& c, Vec2 p, Vec2 q, double t_min, double out[2]);

/// Right normal of the curve's direction of travel at a point on it. On a
/// boundary loop (domain on the left) this points out of the domain.
Vec2 outward_normal(const Curve& c, Vec2 on_curve);

/// Number of intersections of the segment p -> q with the curve.
int crossing_count(const Curve& c, Vec2 p, Vec2 q);

/// Polyline through the curve whose chord error is at most `chord_error`;
/// both endpoints included.
std::vector<Vec2> discretize(const Curve& c, double chord_error);

struct BoundaryPiece {
    BoundaryKind kind = BoundaryKind::Reflecting;
    Curve curve;
    double alpha = 0.0; // Robin only
    double beta = 0.0;  // Robin only
};

struct HeadSpec {
    Vec2 center{};
    double radius = 1.0;
};

struct StraightNeck {
    double length = 1.0;
};

/// What r1 and r2 measure. Centerline: the tube is centred on arcs of radius
/// r1, r2. InnerWall: r1, r2 are the inner walls of each bend, so the
/// centerline runs at r + eps.
enum class ArcRadii { Centerline, InnerWall };

/// Straight run of length `straight`, then an arc of radius r1 turning left
/// by theta1, then an arc of radius r2 turning right by theta2.
struct CurvedNeck {
    double straight = 1.0;
    double r1 = 1.0;
    double r2 = 1.0;
    double theta1 = std::numbers::pi / 2;
    double theta2 = std::numbers::pi / 2;
    ArcRadii radii = ArcRadii::Centerline;
};

struct NeckSpec {
    std::variant<StraightNeck, CurvedNeck> shape;
    double half_width = 0.1;

    /// l + theta1 r1 + theta2 r2 for a curved neck.
    double absolute_length() const;
    /// Length of the tube's centerline (differs from absolute_length only for
    /// ArcRadii::InnerWall).
    double centerline_length() const;
    bool is_curved() const { return std::holds_alternative<CurvedNeck>(shape); }
};

enum class DomainKind {
    Spine,    // head + neck, absorbing neck end
    HeadOnly, // head with a Robin window
    Channel,  // bare neck [0, L] x [-eps, eps], reflecting at x = 0
};

struct RobinData {
    double alpha = 1.0;
    double beta = 0.5;
};

/// Immutable escape domain. The head is always a disk whose window is
/// centred at head.center + (R, 0); the neck leaves in the +x direction.
class SpineGeometry {
public:
    DomainKind kind() const { return kind_; }
    bool has_head() const { return kind_ != DomainKind::Channel; }
    bool has_neck() const { return kind_ != DomainKind::HeadOnly; }
    const HeadSpec& head() const;
    const NeckSpec& neck() const;
    double half_width() const { return eps_; }
    Vec2 gamma_center() const { return gamma_center_; }
    std::optional<RobinData> robin() const { return robin_; }

    /// Closed counterclockwise boundary loop.
    const std::vector<BoundaryPiece>& boundary() const { return boundary_; }

    /// Neck centreline starting at the window centre (or at the channel's
    /// reflecting end).
    const std::vector<Curve>& centerline() const { return centerline_; }

    /// Maps neck coordinates (arclength s along the centreline, normalized
    /// offset eta in [-1, 1]) to the plane. On the first straight section the
    /// cross lines are blended so that s = 0 lands on the mouth: the head arc
    /// for a spine, the flat cap for a channel.
    Vec2 neck_point(double s, double eta) const;

    /// Window (mouth or Robin arc) end points as head angles, ascending.
    double window_half_angle() const;

    friend SpineGeometry build_straight_spine(double, double, double);
    friend SpineGeometry build_head_only(double, double, double, double);
    friend SpineGeometry build_curved_spine(double, double, double, double, double, double,
                                            double, ArcRadii);
    friend SpineGeometry build_channel(double, double);

private:
    SpineGeometry() = default;

    DomainKind kind_ = DomainKind::Spine;
    std::optional<HeadSpec> head_;
    std::optional<NeckSpec> neck_;
    double eps_ = 0.0;
    Vec2 gamma_center_{};
    std::optional<RobinData> robin_;
    std::vector<BoundaryPiece> boundary_;
    std::vector<Curve> centerline_;
};

SpineGeometry build_straight_spine(double radius, double eps, double length);
SpineGeometry build_head_only(double radius, double eps, double alpha, double beta);
SpineGeometry build_curved_spine(double radius, double eps, double straight, double r1, double r2,
                                 double theta1 = std::numbers::pi / 2,
                                 double theta2 = std::numbers::pi / 2,
                                 ArcRadii radii = ArcRadii::Centerline);
/// Pure-neck benchmark domain.
SpineGeometry build_channel(double eps, double length);

/// L + eps * (total unsigned turning of the centreline).
double effective_neck_length(const NeckSpec& neck);

/// Exact area of the domain. Spine: the disk plus the neck measured from the
/// junction chord, so the lens between chord and arc is counted once.
double area(const SpineGeometry& g);
double head_area(const SpineGeometry& g);
double boundary_length(const SpineGeometry& g);

struct Location {
    enum class Kind { Interior, Boundary, Exterior } kind;
    int piece = -1;
};

inline constexpr double kBoundaryBand = 1e-9;

/// Winding (ray crossing) test against the exact boundary curves, with a
/// boundary band of kBoundaryBand.
Location locate(const SpineGeometry& g, Vec2 p);

inline bool is_interior(const SpineGeometry& g, Vec2 p) {
    return locate(g, p).kind == Location::Kind::Interior;
}

struct PolylinePoint {
    Vec2 p;
    BoundaryKind kind;
};

/// Closed polyline approximation; the first point is not repeated at the end.
/// Each point carries the kind of the piece it starts.
std::vector<PolylinePoint> boundary_polyline(const SpineGeometry& g, double chord_error);

double default_chord_error(const SpineGeometry& g);

/// Shoelace area of a closed polyline.
double polygon_area(const std::vector<PolylinePoint>& poly);

} // namespace spine
