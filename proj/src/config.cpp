#include "spine/config.hpp"

#include "spine/asymptotics.hpp"
#include "spine/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace spine {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* want) {
    throw Error(Errc::ConfigError, "key '" + key + "': '" + value + "' is not " + want);
}

constexpr const char* kKnown[] = {"head_radius", "eps", "neck", "L", "l", "r1", "r2", "arc_radii",
                                  "alpha", "beta", "dt", "walkers", "seed", "max_steps"};

} // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto sep = line.find('=');
        if (sep == std::string::npos)
            sep = line.find(':');
        if (sep == std::string::npos)
            throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, sep));
        const std::string value = trim(line.substr(sep + 1));
        if (key.empty() || value.empty())
            throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": empty key or value");
        if (c.has(key))
            throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        c.set(key, value);
    }
    return c;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::ConfigError, "cannot open '" + path + "'");
    return parse(in);
}

std::optional<std::string> KeyValueConfig::text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        return std::nullopt;
    return it->second;
}

std::optional<double> KeyValueConfig::number(const std::string& key) const {
    const auto s = text(key);
    if (!s)
        return std::nullopt;
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (ec != std::errc{} || end != s->data() + s->size())
        bad(key, *s, "a number");
    return v;
}

std::optional<std::uint64_t> KeyValueConfig::integer(const std::string& key) const {
    const auto s = text(key);
    if (!s)
        return std::nullopt;
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (ec != std::errc{} || end != s->data() + s->size())
        bad(key, *s, "a non-negative integer");
    return v;
}

GeometryConfig geometry_config(const KeyValueConfig& kv, GeometryConfig c) {
    if (auto v = kv.number("head_radius")) c.head_radius = *v;
    if (auto v = kv.number("eps")) c.eps = *v;
    if (auto v = kv.number("L")) c.L = *v;
    if (auto v = kv.number("l")) c.l = *v;
    if (auto v = kv.number("r1")) c.r1 = *v;
    if (auto v = kv.number("r2")) c.r2 = *v;
    if (auto v = kv.number("alpha")) c.alpha = *v;
    if (auto v = kv.number("beta")) c.beta = *v;
    if (auto s = kv.text("neck")) {
        if (*s == "straight") c.neck = NeckShape::Straight;
        else if (*s == "curved") c.neck = NeckShape::Curved;
        else if (*s == "none") c.neck = NeckShape::None;
        else if (*s == "channel") c.neck = NeckShape::Channel;
        else bad("neck", *s, "one of straight, curved, none, channel");
    }
    if (auto s = kv.text("arc_radii")) {
        if (*s == "centerline") c.radii = ArcRadii::Centerline;
        else if (*s == "inner_wall") c.radii = ArcRadii::InnerWall;
        else bad("arc_radii", *s, "centerline or inner_wall");
    }
    if (c.alpha.has_value() != c.beta.has_value())
        throw Error(Errc::ConfigError, "alpha and beta go together");
    return c;
}

SpineGeometry build_geometry(const GeometryConfig& c) {
    switch (c.neck) {
    case NeckShape::Straight:
        return build_straight_spine(c.head_radius, c.eps, c.L);
    case NeckShape::Curved:
        return build_curved_spine(c.head_radius, c.eps, c.l, c.r1, c.r2, std::numbers::pi / 2,
                                  std::numbers::pi / 2, c.radii);
    case NeckShape::Channel:
        return build_channel(c.eps, c.L);
    case NeckShape::None:
        break;
    }
    if (c.alpha)
        return build_head_only(c.head_radius, c.eps, *c.alpha, *c.beta);
    const auto [alpha, beta] = robin_coefficients(c.L);
    return build_head_only(c.head_radius, c.eps, alpha, beta);
}

WalkConfig walk_config(const KeyValueConfig& kv, WalkConfig w) {
    if (auto v = kv.number("dt")) w.dt = *v;
    if (auto v = kv.integer("walkers")) w.walkers = *v;
    if (auto v = kv.integer("seed")) w.seed = *v;
    if (auto v = kv.integer("max_steps")) w.max_steps = *v;
    return w;
}

void check_known_keys(const KeyValueConfig& kv) {
    for (const auto& [key, value] : kv.values()) {
        bool known = false;
        for (const char* k : kKnown)
            known = known || key == k;
        if (!known)
            throw Error(Errc::ConfigError, "unknown key '" + key + "'");
    }
}

std::string describe(const GeometryConfig& c) {
    // shortest text that reads back to the same double
    auto num = [](double v) {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    };
    std::string s = "head_radius = " + num(c.head_radius) + "\neps = " + num(c.eps) + '\n';
    switch (c.neck) {
    case NeckShape::Straight: s += "neck = straight\nL = " + num(c.L) + '\n'; break;
    case NeckShape::Channel: s += "neck = channel\nL = " + num(c.L) + '\n'; break;
    case NeckShape::Curved:
        s += "neck = curved\nl = " + num(c.l) + "\nr1 = " + num(c.r1) + "\nr2 = " + num(c.r2) +
             "\narc_radii = " + (c.radii == ArcRadii::InnerWall ? "inner_wall" : "centerline") + '\n';
        break;
    case NeckShape::None: s += "neck = none\nL = " + num(c.L) + '\n'; break;
    }
    if (c.alpha)
        s += "alpha = " + num(*c.alpha) + "\nbeta = " + num(*c.beta) + '\n';
    return s;
}

void write_polyline_csv(std::ostream& os, const SpineGeometry& g, double chord_error, int digits) {
    const auto poly = boundary_polyline(g, chord_error);
    const auto old = os.precision(digits);
    os << "x,y,piece_kind\n";
    for (const PolylinePoint& p : poly)
        os << p.p.x << ',' << p.p.y << ',' << to_string(p.kind) << '\n';
    if (!poly.empty())
        os << poly.front().p.x << ',' << poly.front().p.y << ',' << to_string(poly.front().kind) << '\n';
    os.precision(old);
}

} // namespace spine
