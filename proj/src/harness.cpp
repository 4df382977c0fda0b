#include "spine/harness.hpp"

#include "spine/asymptotics.hpp"
#include "spine/error.hpp"
#include "spine/fem.hpp"
#include "spine/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#ifndef SPINE_VERSION
#define SPINE_VERSION "unknown"
#endif
#ifndef SPINE_DATA_DIR
#define SPINE_DATA_DIR "data"
#endif

namespace spine {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t'))
        s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t'))
        ++b;
    return s.substr(b);
}

std::optional<double> cell_number(const std::string& cell) {
    const std::string c = strip(cell);
    if (c.empty())
        return std::nullopt;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(c, &used);
    } catch (const std::exception&) {
        throw Error(Errc::ConfigError, "'" + c + "' is not a number");
    }
    if (used != c.size())
        throw Error(Errc::ConfigError, "'" + c + "' is not a number");
    return v;
}

std::optional<double> minus(std::optional<double> a, std::optional<double> b) {
    if (a && b)
        return *a - *b;
    return std::nullopt;
}

std::string csv_text(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

void put(std::ostream& os, std::optional<double> v) {
    if (v)
        os << *v;
}

std::vector<double> mesh_sizes(const RunSpec& spec, double eps) {
    if (spec.h_factors.size() < 3)
        throw Error(Errc::ConfigError, "need at least three mesh sizes");
    std::vector<double> h;
    for (double f : spec.h_factors)
        h.push_back(f * eps);
    return h;
}

void note(std::string& into, std::string_view engine, const std::exception& e) {
    if (!into.empty())
        into += "; ";
    into += std::string(engine) + ": " + e.what();
}

double formula_at(const SpineGeometry& g, Vec2 p) {
    switch (g.kind()) {
    case DomainKind::Spine: return mfpt_spine(params_for_spine(g), p).value;
    case DomainKind::HeadOnly: return mfpt_neumann_robin(params_for_head_only(g), p).value;
    case DomainKind::Channel: break;
    }
    throw Error(Errc::InvalidGeometry, "the expansion needs a head");
}

SpineGeometry robin_model(const SpineGeometry& g) {
    if (g.kind() == DomainKind::HeadOnly)
        return g;
    if (g.kind() != DomainKind::Spine)
        throw Error(Errc::InvalidGeometry, "the Robin model needs a head");
    const auto [alpha, beta] = robin_coefficients(effective_neck_length(g.neck()));
    return build_head_only(g.head().radius, g.half_width(), alpha, beta);
}

const ReferenceRow* reference_lookup(const std::vector<ReferenceRow>& ref, const ComparisonRow& row) {
    auto same = [](std::optional<double> a, std::optional<double> b) {
        return a.has_value() == b.has_value() && (!a || std::abs(*a - *b) < 1e-9);
    };
    for (const ReferenceRow& r : ref) {
        if (std::abs(r.eps - row.eps) > 1e-9)
            continue;
        if (row.l ? same(r.l, row.l) && same(r.r1, row.r1) && same(r.r2, row.r2) : std::abs(r.L - row.L) < 1e-9)
            return &r;
    }
    return nullptr;
}

void attach_reference(ComparisonRow& row, const std::vector<ReferenceRow>& ref) {
    const ReferenceRow* r = reference_lookup(ref, row);
    if (!r)
        return;
    row.ref_u_r = r->u_r;
    row.ref_u_eps = r->u_eps;
    row.ref_u = r->u;
    row.ref_printed_eps_minus_r = r->printed_eps_minus_r;
    row.ref_printed_u_minus_eps = r->printed_u_minus_eps;
}

std::vector<ReferenceRow> load_reference_if_present(const RunSpec& spec, const char* file) {
    const std::string dir = spec.reference_dir.empty() ? default_reference_dir() : spec.reference_dir;
    const std::string path = dir + "/" + file;
    if (!std::ifstream(path))
        return {};
    return read_reference(path);
}

void run_engines(const RunSpec& spec, const SpineGeometry& g, ComparisonRow& row) {
    const Vec2 centre = g.head().center;
    const auto h = mesh_sizes(spec, row.eps);
    if (has_engine(spec, Engine::Formula)) {
        try {
            row.u_eps = formula_at(g, centre);
        } catch (const Error& e) {
            note(row.note, "formula", e);
        }
    }
    if (has_engine(spec, Engine::RobinFem)) {
        try {
            row.u_r = refine_and_extrapolate(robin_model(g), Problem::NeumannRobin, centre, h).extrapolated;
        } catch (const Error& e) {
            note(row.note, "robin_fem", e);
        }
    }
    if (has_engine(spec, Engine::Fem)) {
        try {
            row.u = refine_and_extrapolate(g, Problem::Escape, centre, h).extrapolated;
        } catch (const Error& e) {
            note(row.note, "fem", e);
        }
    }
    if (has_engine(spec, Engine::Mc)) {
        try {
            const MfptEstimate m = simulate_mfpt(g, spec.mc, centre);
            row.mc = m.mean;
            row.mc_stderr = m.std_error;
            if (m.censored)
                note(row.note, "mc", Error(Errc::NoConvergence, std::to_string(m.n_censored) + " walkers censored"));
        } catch (const Error& e) {
            note(row.note, "mc", e);
        }
    }
}

void require_engines(const RunSpec& spec) {
    if (spec.engines.empty())
        throw Error(Errc::ConfigError, "no engine selected");
}

} // namespace

std::string_view to_string(Mode m) {
    switch (m) {
    case Mode::Table51: return "table51";
    case Mode::Table52: return "table52";
    case Mode::Field: return "field";
    case Mode::Single: return "single";
    case Mode::Validate: return "validate";
    }
    return "?";
}

std::string_view to_string(Engine e) {
    switch (e) {
    case Engine::Formula: return "formula";
    case Engine::Fem: return "fem";
    case Engine::RobinFem: return "robin_fem";
    case Engine::Mc: return "mc";
    }
    return "?";
}

Mode parse_mode(std::string_view s) {
    for (Mode m : {Mode::Table51, Mode::Table52, Mode::Field, Mode::Single, Mode::Validate})
        if (to_string(m) == s)
            return m;
    throw Error(Errc::ConfigError, "unknown mode '" + std::string(s) + "'");
}

std::vector<Engine> parse_engines(std::string_view list) {
    std::vector<Engine> out;
    for (const std::string& raw : split(list, ',')) {
        const std::string name = strip(raw);
        if (name.empty())
            continue;
        bool found = false;
        for (Engine e : {Engine::Formula, Engine::Fem, Engine::RobinFem, Engine::Mc})
            if (to_string(e) == name) {
                if (std::find(out.begin(), out.end(), e) == out.end())
                    out.push_back(e);
                found = true;
            }
        if (!found)
            throw Error(Errc::ConfigError, "unknown engine '" + name + "'");
    }
    if (out.empty())
        throw Error(Errc::ConfigError, "no engine selected");
    return out;
}

std::vector<double> parse_number_list(std::string_view list) {
    std::vector<double> out;
    for (const std::string& raw : split(list, ',')) {
        const auto v = cell_number(raw);
        if (!v)
            throw Error(Errc::ConfigError, "empty entry in '" + std::string(list) + "'");
        out.push_back(*v);
    }
    return out;
}

bool has_engine(const RunSpec& s, Engine e) {
    return std::find(s.engines.begin(), s.engines.end(), e) != s.engines.end();
}

std::optional<double> ComparisonRow::eps_minus_r() const { return minus(u_eps, u_r); }
std::optional<double> ComparisonRow::u_minus_eps() const { return minus(u, u_eps); }
std::optional<double> ComparisonRow::delta_u_r() const { return minus(u_r, ref_u_r); }
std::optional<double> ComparisonRow::delta_u_eps() const { return minus(u_eps, ref_u_eps); }
std::optional<double> ComparisonRow::delta_u() const { return minus(u, ref_u); }

std::string ComparisonRow::reference_sign_flags() const {
    std::string out;
    auto check = [&](std::optional<double> printed, std::optional<double> recomputed, const char* name) {
        if (printed && recomputed && *printed * *recomputed < 0.0) {
            if (!out.empty())
                out += ';';
            out += name;
        }
    };
    check(ref_printed_eps_minus_r, minus(ref_u_eps, ref_u_r), "u_eps_minus_u_r");
    check(ref_printed_u_minus_eps, minus(ref_u, ref_u_eps), "u_minus_u_eps");
    return out;
}

std::string default_reference_dir() { return SPINE_DATA_DIR; }

std::vector<ReferenceRow> read_reference(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::ConfigError, "cannot open reference '" + path + "'");
    std::vector<std::string> header;
    std::vector<ReferenceRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = strip(line);
        if (line.empty() || line[0] == '#')
            continue;
        const auto cells = split(line, ',');
        if (header.empty()) {
            for (const auto& c : cells)
                header.push_back(strip(c));
            continue;
        }
        if (cells.size() != header.size())
            throw Error(Errc::ConfigError, path + ": row has " + std::to_string(cells.size()) + " cells, header " +
                                               std::to_string(header.size()));
        ReferenceRow r;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const auto v = cell_number(cells[k]);
            const std::string& h = header[k];
            if (h == "eps") r.eps = v.value_or(0.0);
            else if (h == "L") r.L = v.value_or(0.0);
            else if (h == "l") r.l = v;
            else if (h == "r1") r.r1 = v;
            else if (h == "r2") r.r2 = v;
            else if (h == "u_r") r.u_r = v;
            else if (h == "u_eps") r.u_eps = v;
            else if (h == "u") r.u = v;
            else if (h == "u_eps_minus_u_r") r.printed_eps_minus_r = v;
            else if (h == "u_minus_u_eps") r.printed_u_minus_eps = v;
            else if (h == "u_eps_minus_u" && v) r.printed_u_minus_eps = -*v;
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<std::pair<double, double>> table51_grid() {
    std::vector<std::pair<double, double>> g;
    for (double L : {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0})
        g.emplace_back(0.1, L);
    for (int k = 9; k >= 1; --k)
        g.emplace_back(k / 100.0, 2.0);
    return g;
}

std::vector<std::array<double, 4>> table52_grid() {
    return {{0.1, 1.0, 0.7, 0.9},  {0.1, 1.5, 0.7, 0.9},  {0.1, 2.0, 0.7, 0.9}, {0.1, 1.0, 1.0, 1.0},
            {0.05, 1.0, 1.0, 1.0}, {0.05, 2.0, 1.0, 1.0}, {0.05, 3.0, 1.0, 1.0}};
}

std::vector<ComparisonRow> run_table51(const RunSpec& spec) {
    require_engines(spec);
    const auto ref = load_reference_if_present(spec, "table51.csv");
    std::vector<ComparisonRow> rows;
    for (const auto& [eps, L] : table51_grid()) {
        ComparisonRow row;
        row.eps = eps;
        row.L = L;
        row.L_eff = L;
        GeometryConfig c = spec.geometry;
        c.neck = NeckShape::Straight;
        c.eps = eps;
        c.L = L;
        try {
            run_engines(spec, build_geometry(c), row);
        } catch (const Error& e) {
            note(row.note, "geometry", e);
        }
        attach_reference(row, ref);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ComparisonRow> run_table52(const RunSpec& spec) {
    require_engines(spec);
    const auto ref = load_reference_if_present(spec, "table52.csv");
    std::vector<ComparisonRow> rows;
    for (const auto& [eps, l, r1, r2] : spec.curved_rows.empty() ? table52_grid() : spec.curved_rows) {
        ComparisonRow row;
        row.eps = eps;
        row.l = l;
        row.r1 = r1;
        row.r2 = r2;
        GeometryConfig c = spec.geometry;
        c.neck = NeckShape::Curved;
        c.eps = eps;
        c.l = l;
        c.r1 = r1;
        c.r2 = r2;
        c.radii = spec.table52_radii;
        try {
            const SpineGeometry g = build_geometry(c);
            row.L = g.neck().absolute_length();
            row.L_eff = effective_neck_length(g.neck());
            run_engines(spec, g, row);
        } catch (const Error& e) {
            note(row.note, "geometry", e);
        }
        attach_reference(row, ref);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

constexpr const char* kComparisonHeader =
    "eps,L,l,r1,r2,L_eff,u_r,u_eps,u_eps_minus_u_r,u,u_minus_u_eps,order_eps,mc,mc_stderr,"
    "ref_u_r,ref_u_eps,ref_u,delta_u_r,delta_u_eps,delta_u,ref_sign_flag,note";

} // namespace

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows, int precision) {
    const auto old = os.precision(precision);
    os << kComparisonHeader << '\n';
    for (const ComparisonRow& r : rows) {
        os << r.eps << ',' << r.L << ',';
        put(os, r.l);
        os << ',';
        put(os, r.r1);
        os << ',';
        put(os, r.r2);
        os << ',' << r.L_eff << ',';
        for (auto v : {r.u_r, r.u_eps, r.eps_minus_r(), r.u, r.u_minus_eps()}) {
            put(os, v);
            os << ',';
        }
        os << r.order_eps() << ',';
        for (auto v : {r.mc, r.mc_stderr, r.ref_u_r, r.ref_u_eps, r.ref_u, r.delta_u_r(), r.delta_u_eps(),
                       r.delta_u()}) {
            put(os, v);
            os << ',';
        }
        os << r.reference_sign_flags() << ',' << csv_text(r.note) << '\n';
    }
    os.precision(old);
}

std::vector<ComparisonRow> read_comparison_csv(std::istream& is) {
    std::vector<ComparisonRow> rows;
    std::vector<std::string> header;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        auto cells = split(line, ',');
        if (header.empty()) {
            header = cells;
            continue;
        }
        if (cells.size() != header.size())
            throw Error(Errc::ConfigError, "comparison row has the wrong number of cells");
        ComparisonRow r;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const std::string& h = header[k];
            if (h == "note") {
                r.note = cells[k];
                continue;
            }
            if (h == "ref_sign_flag")
                continue;
            const auto v = cell_number(cells[k]);
            if (h == "eps") r.eps = v.value_or(0.0);
            else if (h == "L") r.L = v.value_or(0.0);
            else if (h == "L_eff") r.L_eff = v.value_or(0.0);
            else if (h == "l") r.l = v;
            else if (h == "r1") r.r1 = v;
            else if (h == "r2") r.r2 = v;
            else if (h == "u_r") r.u_r = v;
            else if (h == "u_eps") r.u_eps = v;
            else if (h == "u") r.u = v;
            else if (h == "mc") r.mc = v;
            else if (h == "mc_stderr") r.mc_stderr = v;
            else if (h == "ref_u_r") r.ref_u_r = v;
            else if (h == "ref_u_eps") r.ref_u_eps = v;
            else if (h == "ref_u") r.ref_u = v;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

FieldResult run_field(const RunSpec& spec) {
    require_engines(spec);
    for (Engine e : spec.engines)
        if (e == Engine::RobinFem)
            throw Error(Errc::ConfigError, "field mode takes formula, fem and mc only");
    if (spec.grid < 2)
        throw Error(Errc::ConfigError, "grid needs at least two points per side");
    const SpineGeometry g = build_geometry(spec.geometry);
    const auto poly = boundary_polyline(g, default_chord_error(g));
    Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Vec2 hi = -1.0 * lo;
    for (const auto& p : poly) {
        lo = {std::min(lo.x, p.p.x), std::min(lo.y, p.p.y)};
        hi = {std::max(hi.x, p.p.x), std::max(hi.y, p.p.y)};
    }
    FieldResult out;
    const int n = spec.grid;
    const double eps = g.half_width();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 p{lo.x + (hi.x - lo.x) * i / (n - 1), lo.y + (hi.y - lo.y) * j / (n - 1)};
            if (!is_interior(g, p))
                continue;
            out.grid.push_back(p);
            out.mask.push_back(distance(p, g.gamma_center()) < 5.0 * eps);
        }
    if (out.grid.empty())
        throw Error(Errc::EmptyGrid, "no grid point lies inside the domain");

    auto blank = [&](Engine e) {
        FieldLayer layer{e, {}};
        for (std::size_t k = 0; k < out.grid.size(); ++k)
            layer.points.push_back({out.grid[k], out.mask[k], std::nullopt, std::nullopt});
        return layer;
    };
    for (Engine e : spec.engines) {
        FieldLayer layer = blank(e);
        if (e == Engine::Formula) {
            if (!g.has_head())
                throw Error(Errc::InvalidGeometry, "the expansion needs a head");
            for (GridPoint& gp : layer.points)
                if (distance(gp.p, g.head().center) < g.head().radius)
                    gp.value = formula_at(g, gp.p);
        } else if (e == Engine::Fem) {
            const double h = mesh_sizes(spec, eps).back();
            auto mesh = std::make_shared<const Mesh>(generate_mesh(g, h));
            const ScalarField f = g.kind() == DomainKind::HeadOnly
                                      ? solve_neumann_robin(mesh, g.robin()->alpha, g.robin()->beta)
                                      : solve_escape(mesh);
            for (GridPoint& gp : layer.points)
                gp.value = f.evaluate(gp.p);
        } else if (e == Engine::Mc) {
            WalkConfig cfg = spec.mc;
            cfg.starts = out.grid;
            const auto samples = simulate_field(g, cfg);
            for (std::size_t k = 0; k < samples.size(); ++k) {
                layer.points[k].value = samples[k].estimate.mean;
                layer.points[k].stderr_ = samples[k].estimate.std_error;
            }
        }
        out.layers.push_back(std::move(layer));
    }
    return out;
}

void write_field_layer_csv(std::ostream& os, const FieldLayer& layer, int precision) {
    const auto old = os.precision(precision);
    const bool mc = layer.engine == Engine::Mc;
    os << "x,y,value,mask" << (mc ? ",stderr" : "") << '\n';
    for (const GridPoint& p : layer.points) {
        if (!p.value)
            continue;
        os << p.p.x << ',' << p.p.y << ',' << *p.value << ',' << (p.masked ? 1 : 0);
        if (mc) {
            os << ',';
            put(os, p.stderr_);
        }
        os << '\n';
    }
    os.precision(old);
}

void write_field_difference_csv(std::ostream& os, const FieldLayer& a, const FieldLayer& b, int precision) {
    const auto old = os.precision(precision);
    os << "x,y,difference,mask\n";
    for (std::size_t k = 0; k < a.points.size() && k < b.points.size(); ++k) {
        const auto d = minus(a.points[k].value, b.points[k].value);
        if (d)
            os << a.points[k].p.x << ',' << a.points[k].p.y << ',' << *d << ',' << (a.points[k].masked ? 1 : 0)
               << '\n';
    }
    os.precision(old);
}

double max_unmasked_difference(const FieldLayer& a, const FieldLayer& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.points.size() && k < b.points.size(); ++k)
        if (!a.points[k].masked)
            if (const auto d = minus(a.points[k].value, b.points[k].value))
                worst = std::max(worst, std::abs(*d));
    return worst;
}

std::vector<SingleResult> run_single(const RunSpec& spec) {
    require_engines(spec);
    const SpineGeometry g = build_geometry(spec.geometry);
    std::vector<Vec2> points = spec.points;
    if (points.empty()) {
        if (!g.has_head())
            throw Error(Errc::ConfigError, "a domain without a head needs explicit points");
        points.push_back(g.head().center);
    }
    std::vector<SingleResult> rows;
    for (Vec2 p : points)
        rows.push_back({p, {}, {}, {}, {}, {}, {}, {}, {}});
    const auto h = mesh_sizes(spec, g.half_width());

    if (has_engine(spec, Engine::Formula))
        for (SingleResult& r : rows) {
            try {
                r.formula = formula_at(g, r.p);
            } catch (const Error& e) {
                note(r.note, "formula", e);
            }
        }
    auto extrapolate = [&](const SpineGeometry& dom, Problem problem, Engine engine) {
        try {
            const auto ex = refine_and_extrapolate(dom, problem, std::span<const Vec2>(points), h);
            for (std::size_t k = 0; k < rows.size(); ++k) {
                (engine == Engine::Fem ? rows[k].fem : rows[k].robin_fem) = ex[k].extrapolated;
                (engine == Engine::Fem ? rows[k].fem_order : rows[k].robin_order) = ex[k].observed_order;
            }
        } catch (const Error& e) {
            for (SingleResult& r : rows)
                note(r.note, to_string(engine), e);
        }
    };
    if (has_engine(spec, Engine::Fem)) {
        if (g.kind() == DomainKind::HeadOnly)
            extrapolate(g, Problem::NeumannRobin, Engine::Fem);
        else
            extrapolate(g, Problem::Escape, Engine::Fem);
    }
    if (has_engine(spec, Engine::RobinFem)) {
        try {
            extrapolate(robin_model(g), Problem::NeumannRobin, Engine::RobinFem);
        } catch (const Error& e) {
            for (SingleResult& r : rows)
                note(r.note, "robin_fem", e);
        }
    }
    if (has_engine(spec, Engine::Mc))
        for (std::size_t k = 0; k < rows.size(); ++k) {
            try {
                const MfptEstimate m = simulate_mfpt(g, spec.mc, rows[k].p, k);
                rows[k].mc = m.mean;
                rows[k].mc_stderr = m.std_error;
            } catch (const Error& e) {
                note(rows[k].note, "mc", e);
            }
        }
    return rows;
}

void write_single_csv(std::ostream& os, const std::vector<SingleResult>& rows, int precision) {
    const auto old = os.precision(precision);
    os << "x,y,formula,fem,fem_order,robin_fem,robin_order,mc,mc_stderr,note\n";
    for (const SingleResult& r : rows) {
        os << r.p.x << ',' << r.p.y << ',';
        for (auto v : {r.formula, r.fem, r.fem_order, r.robin_fem, r.robin_order, r.mc, r.mc_stderr}) {
            put(os, v);
            os << ',';
        }
        os << csv_text(r.note) << '\n';
    }
    os.precision(old);
}

bool ValidationReport::passed() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

namespace {

// Integral of ln|t - y| over y in [-1, 1]; y = t -+ d s^2 on each side leaves
// the integrand 2 d s ln(d s^2), which vanishes at the singular end.
double log_inner_numeric(double t) {
    auto side = [](double d) {
        if (d <= 0.0)
            return 0.0;
        auto f = [d](double s) { return 2.0 * d * s * std::log(d * s * s); };
        return quad::integrate(f, 0.0, 1.0, 1e-14, 20);
    };
    return side(t + 1.0) + side(1.0 - t);
}

double log_double_integral_numeric() {
    return quad::integrate(log_inner_numeric, -1.0, 0.0, 1e-13, 20) +
           quad::integrate(log_inner_numeric, 0.0, 1.0, 1e-13, 20);
}

struct Checker {
    ValidationReport report;
    const RunSpec& spec;

    bool skipped(const std::string& group) const {
        return std::find(spec.skip.begin(), spec.skip.end(), group) != spec.skip.end();
    }

    void add(const std::string& group, const std::string& name, bool ok, double measured, double tol,
             std::string detail = {}) {
        report.checks.push_back({group, name, ok ? CheckStatus::Pass : CheckStatus::Fail, measured, tol,
                                 std::move(detail)});
    }

    void fail(const std::string& group, const std::string& name, const std::exception& e) {
        report.checks.push_back({group, name, CheckStatus::Fail, 0.0, 0.0, e.what()});
    }

    void skip(const std::string& group, const std::string& name) {
        report.checks.push_back({group, name, CheckStatus::Skipped, 0.0, 0.0, "skipped"});
    }
};

void kernel_checks(Checker& c) {
    const double numeric = log_double_integral_numeric();
    c.add("kernel", "double_integral_quadrature", std::abs(numeric - c.spec.kernel_reference) <= 1e-8,
          std::abs(numeric - c.spec.kernel_reference), 1e-8);
    c.add("kernel", "double_integral_closed_form",
          std::abs(log_kernel_double_integral() - c.spec.kernel_reference) <= 1e-8,
          std::abs(log_kernel_double_integral() - c.spec.kernel_reference), 1e-8);
    double worst = 0.0;
    for (int k = 0; k <= 20; ++k) {
        const double t = -1.0 + k / 10.0;
        worst = std::max(worst, std::abs(log_inner_numeric(t) - log_kernel_L1(t)));
    }
    c.add("kernel", "L1_closed_form", worst <= 1e-8, worst, 1e-8);
}

void phi_checks(Checker& c) {
    const Vec2 xstar{1.0, 0.0};
    const double h = 1e-4;
    double worst = 0.0;
    for (int k = 0; k < 12; ++k) {
        const Vec2 p = polar(0.15 + 0.06 * k, 0.7 + 0.5 * k);
        auto phi = [&](Vec2 q) { return phi_disk(q, xstar); };
        const double lap = (phi(p + Vec2{h, 0}) + phi(p - Vec2{h, 0}) + phi(p + Vec2{0, h}) +
                            phi(p - Vec2{0, h}) - 4.0 * phi(p)) / (h * h);
        worst = std::max(worst, std::abs(lap + 1.0));
    }
    c.add("phi", "laplacian_phi_disk", worst <= 1e-3, worst, 1e-3);
    try {
        const PhiNumeric phi(HeadSpec{}, xstar);
        double err = 0.0;
        for (int k = 0; k < 8; ++k) {
            const Vec2 p = polar(0.1 + 0.1 * k, 0.3 + 0.8 * k);
            err = std::max(err, std::abs(phi(p) - phi_disk(p, xstar)));
        }
        c.add("phi", "phi_numeric_vs_disk", err <= 5e-3, err, 5e-3);
    } catch (const Error& e) {
        c.fail("phi", "phi_numeric_vs_disk", e);
    }
}

void fem_checks(Checker& c) {
    try {
        const SpineGeometry g = build_straight_spine(1.0, 0.1, 1.0);
        const double target = head_area(g);
        std::vector<double> errors;
        double min_value = 0.0;
        for (double h : {0.04, 0.02, 0.01}) {
            const ScalarField f = solve_escape(std::make_shared<const Mesh>(generate_mesh(g, h)));
            errors.push_back(std::abs(window_flux(f).total + target) / target);
            min_value = std::min(min_value, f.min_value());
        }
        const bool monotone = errors[1] < errors[0] && errors[2] < errors[1];
        std::ostringstream d;
        d << "relative errors " << errors[0] << ", " << errors[1] << ", " << errors[2];
        c.add("fem", "window_flux_compatibility", monotone && errors[2] <= 0.05, errors[2], 0.05, d.str());
        c.add("fem", "positivity", min_value >= -1e-10, min_value, 1e-10);
    } catch (const Error& e) {
        c.fail("fem", "window_flux_compatibility", e);
    }
}

std::optional<double> table_checks(Checker& c) {
    std::optional<double> centre;
    const auto ref = load_reference_if_present(c.spec, "table51.csv");
    for (const auto& [eps, L] : {std::pair{0.1, 1.0}, std::pair{0.05, 2.0}}) {
        std::ostringstream name;
        name << "eps=" << eps << ",L=" << L;
        try {
            const SpineGeometry g = build_straight_spine(1.0, eps, L);
            const double h[3] = {0.4 * eps, 0.2 * eps, 0.1 * eps};
            const double fem = refine_and_extrapolate(g, Problem::Escape, {0, 0}, h).extrapolated;
            const double formula = formula_at(g, {0, 0});
            if (eps == 0.1)
                centre = fem;
            c.add("table", "fem_vs_formula " + name.str(), std::abs(fem - formula) <= 0.15,
                  std::abs(fem - formula), 0.15);
            ComparisonRow row;
            row.eps = eps;
            row.L = L;
            attach_reference(row, ref);
            if (row.ref_u) {
                const double tol = std::max(0.3, 0.01 * *row.ref_u);
                c.add("table", "fem_vs_reference " + name.str(), std::abs(fem - *row.ref_u) <= tol,
                      std::abs(fem - *row.ref_u), tol);
            }
        } catch (const Error& e) {
            c.fail("table", "fem_vs_formula " + name.str(), e);
        }
    }
    return centre;
}

void mc_checks(Checker& c, std::optional<double> fem_centre) {
    try {
        WalkConfig cfg;
        cfg.dt = 1e-5;
        cfg.walkers = 10000;
        cfg.seed = c.spec.mc.seed;
        const MfptEstimate m = simulate_mfpt(build_channel(0.1, 1.0), cfg, {0.0, 0.0});
        std::ostringstream d;
        d << "mean " << m.mean << " stderr " << m.std_error;
        c.add("mc", "channel_mean", std::abs(m.mean - 0.5) <= 3.0 * m.std_error && !m.censored,
              std::abs(m.mean - 0.5), 3.0 * m.std_error, d.str());
    } catch (const Error& e) {
        c.fail("mc", "channel_mean", e);
    }
    try {
        const SpineGeometry g = build_straight_spine(1.0, 0.1, 1.0);
        if (!fem_centre) {
            const double h[3] = {0.04, 0.02, 0.01};
            fem_centre = refine_and_extrapolate(g, Problem::Escape, {0, 0}, h).extrapolated;
        }
        WalkConfig cfg;
        cfg.dt = 1e-4;
        cfg.walkers = 2000;
        cfg.seed = c.spec.mc.seed;
        const MfptEstimate m = simulate_mfpt(g, cfg, {0.0, 0.0});
        const double tol = 3.0 * m.std_error + 0.1;
        std::ostringstream d;
        d << "mc " << m.mean << " stderr " << m.std_error << " fem " << *fem_centre;
        c.add("mc", "spine_centre_vs_fem", std::abs(m.mean - *fem_centre) <= tol && !m.censored,
              std::abs(m.mean - *fem_centre), tol, d.str());
    } catch (const Error& e) {
        c.fail("mc", "spine_centre_vs_fem", e);
    }
}

} // namespace

ValidationReport run_validate(const RunSpec& spec) {
    Checker c{{}, spec};
    if (c.skipped("kernel"))
        c.skip("kernel", "all");
    else
        kernel_checks(c);
    if (c.skipped("phi"))
        c.skip("phi", "all");
    else
        phi_checks(c);
    if (c.skipped("fem"))
        c.skip("fem", "all");
    else
        fem_checks(c);
    std::optional<double> centre;
    if (c.skipped("table"))
        c.skip("table", "all");
    else
        centre = table_checks(c);
    if (c.skipped("mc")) {
        c.skip("mc", "channel_mean");
        c.skip("mc", "spine_centre_vs_fem");
    } else {
        mc_checks(c, centre);
    }
    return c.report;
}

void write_report(std::ostream& os, const ValidationReport& r) {
    const auto old = os.precision(6);
    for (const CheckResult& c : r.checks) {
        const char* status = c.status == CheckStatus::Pass   ? "PASS"
                             : c.status == CheckStatus::Fail ? "FAIL"
                                                             : "SKIP";
        os << status << ' ' << c.group << '.' << c.name;
        if (c.status != CheckStatus::Skipped)
            os << " measured=" << c.measured << " tolerance=" << c.tolerance;
        if (!c.detail.empty())
            os << " (" << c.detail << ')';
        os << '\n';
    }
    os << (r.passed() ? "validation passed" : "validation FAILED") << '\n';
    os.precision(old);
}

std::string version_string() { return SPINE_VERSION; }

void write_metadata(std::ostream& os, const RunSpec& spec) {
    os << "# spine " << version_string() << '\n';
    if (spec.timestamp) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm utc{};
        gmtime_r(&now, &utc);
        os << "# generated " << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ") << '\n';
    }
    os << "# mode " << to_string(spec.mode) << '\n';
    if (spec.mode == Mode::Table51 || spec.mode == Mode::Table52) {
        os << "# head_radius = " << spec.geometry.head_radius << " (other geometry from the table grid)\n";
    } else {
        std::istringstream geo(describe(spec.geometry));
        for (std::string line; std::getline(geo, line);)
            os << "# " << line << '\n';
    }
    os << "# engines";
    for (Engine e : spec.engines)
        os << ' ' << to_string(e);
    os << "\n# h_factors";
    for (double f : spec.h_factors)
        os << ' ' << f;
    os << " (times eps)\n";
    if (has_engine(spec, Engine::Mc))
        os << "# mc dt " << spec.mc.dt << " walkers " << spec.mc.walkers << " seed " << spec.mc.seed << '\n';
    if (spec.mode == Mode::Table52)
        os << "# arc_radii " << (spec.table52_radii == ArcRadii::InnerWall ? "inner_wall" : "centerline") << '\n';
    std::istringstream extra(spec.config_echo);
    for (std::string line; std::getline(extra, line);)
        os << "# " << line << '\n';
}

} // namespace spine
