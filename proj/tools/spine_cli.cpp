#include "spine/config.hpp"
#include "spine/error.hpp"
#include "spine/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

using namespace spine;

namespace {

int exit_code(Errc e) {
    switch (e) {
    case Errc::ConfigError:
    case Errc::InvalidGeometry:
    case Errc::DomainError:
    case Errc::StepTooLarge:
    case Errc::WindowUnresolved:
    case Errc::EmptyGrid:
    case Errc::OutsideDomain:
    case Errc::MeshTooCoarse:
        return 2;
    default:
        return 1;
    }
}

struct Options {
    std::string config;
    std::string out;
    std::optional<std::string> engines;
    std::string h_list;
    std::string skip;
    std::string arc_radii;
    std::vector<std::string> points;
    std::optional<double> dt;
    std::optional<std::size_t> walkers;
    std::optional<std::uint64_t> seed;
    std::optional<double> kernel_reference;
    int grid = 50;
    int precision = 6;
    bool no_timestamp = false;
};

RunSpec make_spec(Mode mode, const Options& o) {
    RunSpec spec;
    spec.mode = mode;
    if (mode == Mode::Table51 || mode == Mode::Table52)
        spec.engines = {Engine::Formula, Engine::Fem, Engine::RobinFem};
    else if (mode == Mode::Field)
        spec.engines = {Engine::Formula, Engine::Fem};
    if (!o.config.empty()) {
        const KeyValueConfig kv = KeyValueConfig::load(o.config);
        check_known_keys(kv);
        spec.geometry = geometry_config(kv);
        spec.mc = walk_config(kv);
        spec.config_echo = "config " + o.config;
    }
    if (o.engines)
        spec.engines = parse_engines(*o.engines);
    if (!o.h_list.empty())
        spec.h_factors = parse_number_list(o.h_list);
    if (o.dt) spec.mc.dt = *o.dt;
    if (o.walkers) spec.mc.walkers = *o.walkers;
    if (o.seed) spec.mc.seed = *o.seed;
    if (o.kernel_reference) spec.kernel_reference = *o.kernel_reference;
    spec.grid = o.grid;
    spec.precision = o.precision;
    spec.timestamp = !o.no_timestamp;
    if (!o.skip.empty()) {
        std::string cur;
        for (char c : o.skip + ",") {
            if (c == ',') {
                if (!cur.empty())
                    spec.skip.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
    }
    if (o.arc_radii == "centerline")
        spec.table52_radii = ArcRadii::Centerline;
    else if (o.arc_radii == "inner_wall" || o.arc_radii.empty())
        spec.table52_radii = ArcRadii::InnerWall;
    else
        throw Error(Errc::ConfigError, "--arc-radii takes centerline or inner_wall");
    for (const std::string& p : o.points) {
        const auto xy = parse_number_list(p);
        if (xy.size() != 2)
            throw Error(Errc::ConfigError, "--point takes X,Y");
        spec.points.push_back({xy[0], xy[1]});
    }
    return spec;
}

// Writes to --out when given, else stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_)
                throw Error(Errc::ConfigError, "cannot write '" + path + "'");
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void print_table_summary(const std::vector<ComparisonRow>& rows) {
    std::cerr.precision(6);
    for (const ComparisonRow& r : rows) {
        std::cerr << "eps=" << r.eps << " L=" << r.L;
        if (r.u) std::cerr << " u=" << *r.u;
        if (r.ref_u) std::cerr << " (ref " << *r.ref_u << ")";
        if (r.u_eps) std::cerr << " u_eps=" << *r.u_eps;
        if (r.ref_u_eps) std::cerr << " (ref " << *r.ref_u_eps << ")";
        if (r.u_minus_eps()) std::cerr << " |u-u_eps|=" << std::abs(*r.u_minus_eps());
        if (!r.note.empty()) std::cerr << " [" << r.note << "]";
        std::cerr << '\n';
    }
}

int run(Mode mode, const Options& o) {
    const RunSpec spec = make_spec(mode, o);
    switch (mode) {
    case Mode::Table51:
    case Mode::Table52: {
        const auto rows = mode == Mode::Table51 ? run_table51(spec) : run_table52(spec);
        Sink sink(o.out);
        write_metadata(sink.os(), spec);
        write_comparison_csv(sink.os(), rows, spec.precision);
        if (!o.out.empty())
            print_table_summary(rows);
        return 0;
    }
    case Mode::Single: {
        const auto rows = run_single(spec);
        Sink sink(o.out);
        write_metadata(sink.os(), spec);
        write_single_csv(sink.os(), rows, spec.precision);
        return 0;
    }
    case Mode::Field: {
        const FieldResult f = run_field(spec);
        const std::string prefix = o.out.empty() ? "field" : o.out;
        for (const FieldLayer& layer : f.layers) {
            Sink sink(prefix + "_" + std::string(to_string(layer.engine)) + ".csv");
            write_metadata(sink.os(), spec);
            write_field_layer_csv(sink.os(), layer, spec.precision);
        }
        for (std::size_t a = 0; a < f.layers.size(); ++a)
            for (std::size_t b = a + 1; b < f.layers.size(); ++b) {
                const std::string name = std::string(to_string(f.layers[b].engine)) + "_minus_" +
                                         std::string(to_string(f.layers[a].engine));
                Sink sink(prefix + "_" + name + ".csv");
                write_metadata(sink.os(), spec);
                write_field_difference_csv(sink.os(), f.layers[b], f.layers[a], spec.precision);
                std::cerr << name << ": max unmasked |difference| = "
                          << max_unmasked_difference(f.layers[b], f.layers[a]) << '\n';
            }
        return 0;
    }
    case Mode::Validate: {
        const ValidationReport r = run_validate(spec);
        write_report(std::cout, r);
        if (!o.out.empty()) {
            Sink sink(o.out);
            write_metadata(sink.os(), spec);
            write_report(sink.os(), r);
        }
        return r.passed() ? 0 : 1;
    }
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean first passage times for a dendritic spine: expansion formula, finite elements, Monte Carlo"};
    app.set_version_flag("--version", version_string());
    Options o;
    app.add_option("--config", o.config, "key = value geometry and walk config")->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "output file (field: file prefix)");
    app.add_option("--engines", o.engines, "comma list of formula, fem, robin_fem, mc");
    app.add_option("--h-list", o.h_list, "mesh sizes as multiples of eps, strictly decreasing");
    app.add_option("--dt", o.dt, "Monte Carlo time step");
    app.add_option("--walkers", o.walkers, "Monte Carlo walkers per start point");
    app.add_option("--seed", o.seed, "Monte Carlo seed");
    app.add_option("--grid", o.grid, "field lattice points per side");
    app.add_option("--precision", o.precision, "significant digits in CSV output");
    app.add_option("--skip", o.skip, "validate groups to skip: kernel, phi, fem, table, mc");
    app.add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp metadata line");
    app.add_option("--point", o.points, "evaluation point X,Y for single mode (repeatable)");
    app.add_option("--arc-radii", o.arc_radii, "curved table bends: inner_wall (default) or centerline");
    app.add_option("--kernel-reference", o.kernel_reference, "expected double log integral (validate)")
        ->group("");

    Mode mode = Mode::Single;
    const std::pair<Mode, const char*> modes[] = {
        {Mode::Table51, "straight-neck comparison grid at the head centre (16 rows)"},
        {Mode::Table52, "curved-neck comparison grid at the head centre (7 rows)"},
        {Mode::Field, "MFPT on a lattice over the domain, one CSV per engine plus differences"},
        {Mode::Single, "MFPT at given points (default: head centre)"},
        {Mode::Validate, "self-checks; exit 1 if any fails"}};
    for (const auto& [m, help] : modes) {
        auto* sub = app.add_subcommand(std::string(to_string(m)), help);
        sub->fallthrough();
        sub->callback([&mode, m] { mode = m; });
    }
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return run(mode, o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
