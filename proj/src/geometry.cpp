#include "spine/geometry.hpp"

#include "spine/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spine {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double wrap_positive(double angle) {
    double a = std::fmod(angle, kTwoPi);
    if (a < 0.0)
        a += kTwoPi;
    return a;
}

// Fraction of the arc's sweep at which `angle` sits, or a value outside
// [0, 1] if the angle is not covered by the arc.
double arc_fraction(const Arc& arc, double angle) {
    const double offset = arc.sweep >= 0.0 ? wrap_positive(angle - arc.start_angle)
                                           : wrap_positive(arc.start_angle - angle);
    const double span = std::abs(arc.sweep);
    if (span >= kTwoPi - 1e-15)
        return offset / span;
    // Tolerate round-off at the seam so arc end points count as covered.
    if (offset > span && kTwoPi - offset < 1e-13)
        return 0.0;
    return offset / span;
}

std::string fmt_error(const char* what, double value) {
    std::ostringstream os;
    os << what << " (got " << value << ")";
    return os.str();
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw Error(Errc::InvalidGeometry, fmt_error(name, v));
}

} // namespace

std::string_view to_string(BoundaryKind kind) {
    switch (kind) {
    case BoundaryKind::Reflecting: return "reflecting";
    case BoundaryKind::Absorbing: return "absorbing";
    case BoundaryKind::Robin: return "robin";
    }
    return "unknown";
}

double length(const Curve& c) {
    return std::visit(overloaded{[](const Segment& s) { return distance(s.a, s.b); },
                                 [](const Arc& a) { return a.radius * std::abs(a.sweep); }},
                      c);
}

Vec2 point_at(const Curve& c, double s) {
    return std::visit(overloaded{[s](const Segment& seg) {
                                     const double len = distance(seg.a, seg.b);
                                     return seg.a + (s / len) * (seg.b - seg.a);
                                 },
                                 [s](const Arc& a) {
                                     const double dir = a.sweep >= 0.0 ? 1.0 : -1.0;
                                     return a.center +
                                            polar(a.radius, a.start_angle + dir * s / a.radius);
                                 }},
                      c);
}

Vec2 tangent_at(const Curve& c, double s) {
    return std::visit(overloaded{[](const Segment& seg) { return unit(seg.b - seg.a); },
                                 [s](const Arc& a) {
                                     const double dir = a.sweep >= 0.0 ? 1.0 : -1.0;
                                     const double phi = a.start_angle + dir * s / a.radius;
                                     return Vec2{-dir * std::sin(phi), dir * std::cos(phi)};
                                 }},
                      c);
}

Vec2 start_point(const Curve& c) { return point_at(c, 0.0); }
Vec2 end_point(const Curve& c) { return point_at(c, length(c)); }

double distance_to(const Curve& c, Vec2 p) {
    return std::visit(
        overloaded{[p](const Segment& seg) {
                       const Vec2 d = seg.b - seg.a;
                       const double t = std::clamp(dot(p - seg.a, d) / norm2(d), 0.0, 1.0);
                       return distance(p, seg.a + t * d);
                   },
                   [p](const Arc& a) {
                       const Vec2 r = p - a.center;
                       const double f = arc_fraction(a, std::atan2(r.y, r.x));
                       if (f >= 0.0 && f <= 1.0)
                           return std::abs(norm(r) - a.radius);
                       const Arc& arc = a;
                       const Vec2 s0 = a.center + polar(a.radius, a.start_angle);
                       const Vec2 s1 = a.center + polar(arc.radius, a.start_angle + a.sweep);
                       return std::min(distance(p, s0), distance(p, s1));
                   }},
        c);
}

namespace {

// All parameters t in (t_min, 1] where segment p->q meets the curve; at most two.
int intersections(const Curve& c, Vec2 p, Vec2 q, double t_min, double out[2]) {
    const Vec2 d = q - p;
    if (const auto* seg = std::get_if<Segment>(&c)) {
        const Vec2 e = seg->b - seg->a;
        const double denom = cross(d, e);
        if (std::abs(denom) < 1e-300)
            return 0;
        const Vec2 w = seg->a - p;
        const double t = cross(w, e) / denom;
        const double u = cross(w, d) / denom;
        if (t > t_min && t <= 1.0 && u >= 0.0 && u <= 1.0) {
            out[0] = t;
            return 1;
        }
        return 0;
    }
    const Arc& arc = std::get<Arc>(c);
    const Vec2 f = p - arc.center;
    const double a = norm2(d);
    if (a == 0.0)
        return 0;
    const double b = 2.0 * dot(f, d);
    const double cc = norm2(f) - arc.radius * arc.radius;
    const double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0)
        return 0;
    const double sq = std::sqrt(disc);
    // Numerically stable root pair.
    const double qq = -0.5 * (b + std::copysign(sq, b));
    double roots[2] = {qq / a, qq != 0.0 ? cc / qq : qq / a};
    if (roots[0] > roots[1])
        std::swap(roots[0], roots[1]);
    int n = 0;
    for (int i = 0; i < 2; ++i) {
        const double t = roots[i];
        if (i == 1 && disc == 0.0)
            break;
        if (!(t > t_min && t <= 1.0))
            continue;
        const Vec2 hit = f + t * d;
        const double fr = arc_fraction(arc, std::atan2(hit.y, hit.x));
        if (fr >= 0.0 && fr <= 1.0)
            out[n++] = t;
    }
    return n;
}

} // namespace

int crossing_parameters(const Curve& c, Vec2 p, Vec2 q, double t_min, double out[2]) {
    return intersections(c, p, q, t_min, out);
}

Vec2 outward_normal(const Curve& c, Vec2 on_curve) {
    Vec2 t;
    if (const auto* seg = std::get_if<Segment>(&c)) {
        t = unit(seg->b - seg->a);
    } else {
        const Arc& a = std::get<Arc>(c);
        t = (a.sweep >= 0.0 ? 1.0 : -1.0) * perp(unit(on_curve - a.center));
    }
    return {t.y, -t.x};
}

std::optional<double> first_crossing(const Curve& c, Vec2 p, Vec2 q, double t_min) {
    double ts[2];
    const int n = intersections(c, p, q, t_min, ts);
    if (n == 0)
        return std::nullopt;
    return ts[0];
}

int crossing_count(const Curve& c, Vec2 p, Vec2 q) {
    double ts[2];
    return intersections(c, p, q, 0.0, ts);
}

std::vector<Vec2> discretize(const Curve& c, double chord_error) {
    std::vector<Vec2> pts;
    if (const auto* seg = std::get_if<Segment>(&c)) {
        pts = {seg->a, seg->b};
        return pts;
    }
    const Arc& arc = std::get<Arc>(c);
    const double ratio = std::clamp(1.0 - chord_error / arc.radius, -1.0, 1.0);
    const double max_step = std::max(2.0 * std::acos(ratio), 1e-6);
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(arc.sweep) / max_step)));
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i)
        pts.push_back(arc.center + polar(arc.radius, arc.start_angle + arc.sweep * i / n));
    return pts;
}

double NeckSpec::absolute_length() const {
    return std::visit(overloaded{[](const StraightNeck& s) { return s.length; },
                                 [](const CurvedNeck& c) {
                                     return c.straight + c.theta1 * c.r1 + c.theta2 * c.r2;
                                 }},
                      shape);
}

double NeckSpec::centerline_length() const {
    if (const auto* c = std::get_if<CurvedNeck>(&shape); c && c->radii == ArcRadii::InnerWall)
        return absolute_length() + half_width * (c->theta1 + c->theta2);
    return absolute_length();
}

const HeadSpec& SpineGeometry::head() const {
    if (!head_)
        throw Error(Errc::InvalidGeometry, "domain has no head");
    return *head_;
}

const NeckSpec& SpineGeometry::neck() const {
    if (!neck_)
        throw Error(Errc::InvalidGeometry, "domain has no neck");
    return *neck_;
}

double SpineGeometry::window_half_angle() const {
    const HeadSpec& h = head();
    if (kind_ == DomainKind::HeadOnly)
        return eps_ / h.radius;
    return std::asin(eps_ / h.radius);
}

Vec2 SpineGeometry::neck_point(double s, double eta) const {
    const double offset = eps_ * eta;
    // Locate the centreline section.
    double s0 = 0.0;
    std::size_t k = 0;
    for (; k + 1 < centerline_.size(); ++k) {
        const double len = length(centerline_[k]);
        if (s <= s0 + len)
            break;
        s0 += len;
    }
    const Curve& sec = centerline_[k];
    const double local = std::clamp(s - s0, 0.0, length(sec));
    if (k == 0 && std::holds_alternative<Segment>(sec)) {
        // Blend from the mouth to the end of the first straight section.
        const Segment& seg = std::get<Segment>(sec);
        const Vec2 t = unit(seg.b - seg.a);
        const Vec2 n = perp(t);
        Vec2 mouth = seg.a + offset * n;
        if (kind_ == DomainKind::Spine) {
            const HeadSpec& h = *head_;
            const double along = std::sqrt(h.radius * h.radius - offset * offset);
            mouth = h.center + along * t + offset * n;
        }
        const Vec2 far = seg.b + offset * n;
        const double len = length(sec);
        return mouth + (local / len) * (far - mouth);
    }
    return point_at(sec, local) + offset * perp(tangent_at(sec, local));
}

namespace {

void check_thin_neck(double radius, double eps) {
    require_positive(radius, "head radius must be positive");
    require_positive(eps, "neck half-width must be positive");
    if (!(eps < radius / 2.0))
        throw Error(Errc::InvalidGeometry, fmt_error("neck half-width must be < R/2", eps));
}

// Appends the neck walls and end cap given the centreline (first section a
// straight segment starting at the window centre).
void append_neck_boundary(std::vector<BoundaryPiece>& out, const std::vector<Curve>& centerline,
                          double eps, Vec2 right_start, Vec2 left_end) {
    auto offset_curve = [eps](const Curve& c, double eta, bool first, Vec2 first_point) -> Curve {
        if (const auto* seg = std::get_if<Segment>(&c)) {
            const Vec2 n = perp(unit(seg->b - seg->a));
            const Vec2 a = first ? first_point : seg->a + eps * eta * n;
            return Segment{a, seg->b + eps * eta * n};
        }
        const Arc& arc = std::get<Arc>(c);
        // Left normal points toward the centre on a counterclockwise arc.
        const double r = arc.sweep >= 0.0 ? arc.radius - eps * eta : arc.radius + eps * eta;
        return Arc{arc.center, r, arc.start_angle, arc.sweep};
    };
    auto reversed = [](const Curve& c) -> Curve {
        if (const auto* seg = std::get_if<Segment>(&c))
            return Segment{seg->b, seg->a};
        const Arc& a = std::get<Arc>(c);
        return Arc{a.center, a.radius, a.start_angle + a.sweep, -a.sweep};
    };

    for (std::size_t k = 0; k < centerline.size(); ++k)
        out.push_back({BoundaryKind::Reflecting,
                       offset_curve(centerline[k], -1.0, k == 0, right_start)});
    const Curve& last = centerline.back();
    const double len = length(last);
    const Vec2 tip = point_at(last, len);
    const Vec2 n = perp(tangent_at(last, len));
    out.push_back({BoundaryKind::Absorbing, Segment{tip - eps * n, tip + eps * n}});
    for (std::size_t k = centerline.size(); k-- > 0;) {
        Curve left = offset_curve(centerline[k], 1.0, false, {});
        if (k == 0)
            std::get<Segment>(left).a = left_end;
        out.push_back({BoundaryKind::Reflecting, reversed(left)});
    }
}

} // namespace

SpineGeometry build_straight_spine(double radius, double eps, double len) {
    check_thin_neck(radius, eps);
    require_positive(len, "neck length must be positive");
    SpineGeometry g;
    g.kind_ = DomainKind::Spine;
    g.head_ = HeadSpec{{0.0, 0.0}, radius};
    g.neck_ = NeckSpec{StraightNeck{len}, eps};
    g.eps_ = eps;
    g.gamma_center_ = {radius, 0.0};
    g.centerline_ = {Segment{{radius, 0.0}, {radius + len, 0.0}}};

    const double half = std::asin(eps / radius);
    const double xc = std::sqrt(radius * radius - eps * eps);
    append_neck_boundary(g.boundary_, g.centerline_, eps, {xc, -eps}, {xc, eps});
    g.boundary_.push_back({BoundaryKind::Reflecting, Arc{{0.0, 0.0}, radius, half, kTwoPi - 2 * half}});
    return g;
}

SpineGeometry build_head_only(double radius, double eps, double alpha, double beta) {
    check_thin_neck(radius, eps);
    if (!(alpha > 0.0))
        throw Error(Errc::InvalidGeometry, fmt_error("Robin coefficient alpha must be > 0", alpha));
    SpineGeometry g;
    g.kind_ = DomainKind::HeadOnly;
    g.head_ = HeadSpec{{0.0, 0.0}, radius};
    g.eps_ = eps;
    g.gamma_center_ = {radius, 0.0};
    g.robin_ = RobinData{alpha, beta};
    const double half = eps / radius;
    g.boundary_.push_back({BoundaryKind::Robin, Arc{{0.0, 0.0}, radius, -half, 2 * half}, alpha, beta});
    g.boundary_.push_back({BoundaryKind::Reflecting, Arc{{0.0, 0.0}, radius, half, kTwoPi - 2 * half}});
    return g;
}

SpineGeometry build_curved_spine(double radius, double eps, double straight, double r1, double r2,
                                 double theta1, double theta2, ArcRadii radii) {
    check_thin_neck(radius, eps);
    require_positive(straight, "straight neck part must be positive");
    require_positive(r1, "arc radius r1 must be positive");
    require_positive(r2, "arc radius r2 must be positive");
    if (radii == ArcRadii::Centerline && (!(eps < r1) || !(eps < r2)))
        throw Error(Errc::InvalidGeometry,
                    fmt_error("neck half-width must be below both arc radii", eps));
    if (!(theta1 > 0.0 && theta1 < kPi + 1e-12) || !(theta2 > 0.0 && theta2 < kPi + 1e-12))
        throw Error(Errc::InvalidGeometry, "arc angles must lie in (0, pi]");

    SpineGeometry g;
    g.kind_ = DomainKind::Spine;
    g.head_ = HeadSpec{{0.0, 0.0}, radius};
    g.neck_ = NeckSpec{CurvedNeck{straight, r1, r2, theta1, theta2, radii}, eps};
    if (radii == ArcRadii::InnerWall) {
        r1 += eps;
        r2 += eps;
    }
    g.eps_ = eps;
    g.gamma_center_ = {radius, 0.0};

    const Vec2 p0{radius, 0.0};
    const Vec2 p1{radius + straight, 0.0};
    // Left turn: centre on the left of +x.
    const Arc first{p1 + Vec2{0.0, r1}, r1, -kPi / 2, theta1};
    const Vec2 p2 = end_point(first);
    const Vec2 t2 = tangent_at(first, length(first));
    // Right turn: centre on the right of the current heading.
    const Vec2 c2 = p2 - r2 * perp(t2);
    const double a2 = std::atan2(p2.y - c2.y, p2.x - c2.x);
    const Arc second{c2, r2, a2, -theta2};
    g.centerline_ = {Segment{p0, p1}, first, second};

    const double half = std::asin(eps / radius);
    const double xc = std::sqrt(radius * radius - eps * eps);
    append_neck_boundary(g.boundary_, g.centerline_, eps, {xc, -eps}, {xc, eps});
    g.boundary_.push_back({BoundaryKind::Reflecting, Arc{{0.0, 0.0}, radius, half, kTwoPi - 2 * half}});

    // The tube beyond the straight run must stay clear of the head.
    for (std::size_t k = 1; k < g.boundary_.size(); ++k) {
        const auto& piece = g.boundary_[k];
        if (std::holds_alternative<Segment>(piece.curve) || k + 1 == g.boundary_.size())
            continue;
        for (Vec2 q : discretize(piece.curve, eps / 16))
            if (norm(q) < radius + eps)
                throw Error(Errc::InvalidGeometry, "curved neck folds back into the head");
    }
    return g;
}

SpineGeometry build_channel(double eps, double len) {
    require_positive(eps, "channel half-width must be positive");
    require_positive(len, "channel length must be positive");
    SpineGeometry g;
    g.kind_ = DomainKind::Channel;
    g.neck_ = NeckSpec{StraightNeck{len}, eps};
    g.eps_ = eps;
    g.gamma_center_ = {0.0, 0.0};
    g.centerline_ = {Segment{{0.0, 0.0}, {len, 0.0}}};
    append_neck_boundary(g.boundary_, g.centerline_, eps, {0.0, -eps}, {0.0, eps});
    g.boundary_.push_back({BoundaryKind::Reflecting, Segment{{0.0, eps}, {0.0, -eps}}});
    return g;
}

double effective_neck_length(const NeckSpec& neck) {
    return std::visit(overloaded{[](const StraightNeck& s) { return s.length; },
                                 [&neck](const CurvedNeck& c) {
                                     return neck.absolute_length() +
                                            neck.half_width * (std::abs(c.theta1) + std::abs(c.theta2));
                                 }},
                      neck.shape);
}

double head_area(const SpineGeometry& g) {
    const double r = g.head().radius;
    return kPi * r * r;
}

double area(const SpineGeometry& g) {
    switch (g.kind()) {
    case DomainKind::HeadOnly: return head_area(g);
    case DomainKind::Channel: return 2.0 * g.half_width() * g.neck().centerline_length();
    case DomainKind::Spine: break;
    }
    const double r = g.head().radius;
    const double eps = g.half_width();
    const double xc = std::sqrt(r * r - eps * eps);
    const double lens = r * r * std::asin(eps / r) - eps * xc;
    return kPi * r * r + 2.0 * eps * (r - xc + g.neck().centerline_length()) - lens;
}

double boundary_length(const SpineGeometry& g) {
    double total = 0.0;
    for (const auto& piece : g.boundary())
        total += length(piece.curve);
    return total;
}

Location locate(const SpineGeometry& g, Vec2 p) {
    const auto& pieces = g.boundary();
    for (std::size_t k = 0; k < pieces.size(); ++k)
        if (distance_to(pieces[k].curve, p) < kBoundaryBand)
            return {Location::Kind::Boundary, static_cast<int>(k)};
    // Ray in an irrational direction so that it never grazes a vertex of the
    // axis-aligned pieces.
    const Vec2 dir = polar(1.0, 0.3719023);
    const Vec2 far = p + 1e4 * dir;
    int crossings = 0;
    for (const auto& piece : pieces)
        crossings += crossing_count(piece.curve, p, far);
    return {crossings % 2 == 1 ? Location::Kind::Interior : Location::Kind::Exterior, -1};
}

double default_chord_error(const SpineGeometry& g) {
    return (g.has_head() ? g.head().radius : g.half_width()) / 512.0;
}

std::vector<PolylinePoint> boundary_polyline(const SpineGeometry& g, double chord_error) {
    std::vector<PolylinePoint> out;
    for (const auto& piece : g.boundary()) {
        auto pts = discretize(piece.curve, chord_error);
        pts.pop_back();
        for (Vec2 q : pts)
            out.push_back({q, piece.kind});
    }
    return out;
}

double polygon_area(const std::vector<PolylinePoint>& poly) {
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 a = poly[i].p;
        const Vec2 b = poly[(i + 1) % poly.size()].p;
        twice += cross(a, b);
    }
    return 0.5 * twice;
}

} // namespace spine
