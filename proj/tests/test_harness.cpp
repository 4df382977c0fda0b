#include "spine/error.hpp"
#include "spine/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace spine;

TEST_CASE("engine lists") {
    CHECK(parse_engines("formula, fem,mc") == std::vector<Engine>{Engine::Formula, Engine::Fem, Engine::Mc});
    CHECK(parse_engines("robin_fem,robin_fem") == std::vector<Engine>{Engine::RobinFem});
    CHECK_THROWS_AS(parse_engines(""), Error);
    CHECK_THROWS_AS(parse_engines("fem,magic"), Error);
    CHECK(parse_mode("table52") == Mode::Table52);
    CHECK_THROWS_AS(parse_mode("table53"), Error);
    CHECK(parse_number_list("0.4,0.2,0.1") == std::vector<double>{0.4, 0.2, 0.1});
}

TEST_CASE("empty engine set is a config error") {
    RunSpec s;
    s.engines.clear();
    try {
        run_table51(s);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ConfigError);
    }
}

TEST_CASE("differences are recomputed from values") {
    ComparisonRow r;
    r.u_r = 19.4569;
    r.u_eps = 19.5136;
    r.u = 19.5651;
    CHECK(*r.eps_minus_r() == doctest::Approx(0.0567));
    CHECK(*r.u_minus_eps() == doctest::Approx(0.0515));
    r.u_r.reset();
    CHECK_FALSE(r.eps_minus_r().has_value());
}

TEST_CASE("bundled straight-neck reference has inconsistent printed signs") {
    const auto ref = read_reference(default_reference_dir() + "/table51.csv");
    REQUIRE(ref.size() == 16);
    CHECK(ref[0].u == 19.5651);
    CHECK(ref[15].u_r == 321.7331);
    for (const ReferenceRow& r : ref) {
        ComparisonRow row;
        row.ref_u_r = r.u_r;
        row.ref_u_eps = r.u_eps;
        row.ref_u = r.u;
        row.ref_printed_eps_minus_r = r.printed_eps_minus_r;
        row.ref_printed_u_minus_eps = r.printed_u_minus_eps;
        CHECK(row.reference_sign_flags() == "u_eps_minus_u_r;u_minus_u_eps");
    }
    const auto curved = read_reference(default_reference_dir() + "/table52.csv");
    REQUIRE(curved.size() == 7);
    for (const ReferenceRow& r : curved) {
        ComparisonRow row;
        row.ref_u_eps = r.u_eps;
        row.ref_u = r.u;
        row.ref_printed_u_minus_eps = r.printed_u_minus_eps;
        CHECK(row.reference_sign_flags().empty());
    }
}

TEST_CASE("comparison CSV round-trips") {
    ComparisonRow a;
    a.eps = 0.1;
    a.L = 4.141592653589793;
    a.L_eff = 4.455751918948772;
    a.l = 1.0;
    a.r1 = 0.7;
    a.r2 = 0.9;
    a.u_eps = 83.27713001;
    a.u = 83.10210011;
    a.ref_u = 82.9631;
    a.note = "robin_fem: skipped";
    ComparisonRow b;
    b.eps = 0.05;
    b.L = 2.0;
    b.L_eff = 2.0;
    b.u_r = 68.884;
    b.mc = 68.5;
    b.mc_stderr = 0.4;
    std::stringstream ss;
    write_comparison_csv(ss, {a, b}, 17);
    const auto back = read_comparison_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].L == a.L);
    CHECK(back[0].L_eff == a.L_eff);
    CHECK(back[0].l == a.l);
    CHECK(back[0].u_eps == a.u_eps);
    CHECK(back[0].u == a.u);
    CHECK(back[0].ref_u == a.ref_u);
    CHECK_FALSE(back[0].u_r.has_value());
    CHECK(back[0].note == a.note);
    CHECK(back[1].u_r == b.u_r);
    CHECK(back[1].mc_stderr == b.mc_stderr);
    CHECK_FALSE(back[1].l.has_value());
    std::stringstream again;
    write_comparison_csv(again, back, 17);
    std::stringstream first;
    write_comparison_csv(first, {a, b}, 17);
    CHECK(again.str() == first.str());
}

TEST_CASE("curved table surfaces per-row geometry errors") {
    RunSpec s;
    s.engines = {Engine::Formula};
    s.curved_rows = {{0.1, 1.0, 0.0, 1.0}, {0.1, 1.0, 1.0, 1.0}};
    const auto rows = run_table52(s);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].note.find("geometry:") != std::string::npos);
    CHECK_FALSE(rows[0].u_eps.has_value());
    REQUIRE(rows[1].u_eps.has_value());
    CHECK(std::abs(*rows[1].u_eps - 83.253) <= 0.15);
    CHECK(rows[1].ref_u == 82.9631);
}

TEST_CASE("straight table formula column") {
    RunSpec s;
    s.engines = {Engine::Formula};
    const auto rows = run_table51(s);
    REQUIRE(rows.size() == 16);
    for (const ComparisonRow& r : rows) {
        REQUIRE(r.u_eps.has_value());
        REQUIRE(r.ref_u_eps.has_value());
        CHECK(std::abs(*r.delta_u_eps()) <= 0.15);
    }
}

TEST_CASE("field: fem against the expansion away from the window") {
    RunSpec s;
    s.mode = Mode::Field;
    s.engines = {Engine::Formula, Engine::Fem};
    s.grid = 50;
    const FieldResult f = run_field(s);
    REQUIRE(f.layers.size() == 2);
    const double d = max_unmasked_difference(f.layers[1], f.layers[0]);
    MESSAGE("max unmasked |fem - formula| " << d);
    CHECK(d <= 0.15);
    std::ostringstream os;
    write_field_difference_csv(os, f.layers[1], f.layers[0], 6);
    CHECK(os.str().rfind("x,y,difference,mask\n", 0) == 0);
}

TEST_CASE("field: formula alone on a curved neck, empty grids") {
    RunSpec s;
    s.mode = Mode::Field;
    s.engines = {Engine::Formula};
    s.geometry.neck = NeckShape::Curved;
    s.grid = 20;
    const FieldResult f = run_field(s);
    REQUIRE(f.layers.size() == 1);
    std::size_t with_value = 0;
    for (const GridPoint& p : f.layers[0].points)
        with_value += p.value.has_value();
    CHECK(with_value > 0);
    CHECK(with_value < f.grid.size());

    s.grid = 2;
    try {
        run_field(s);
        FAIL("expected EmptyGrid");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyGrid);
    }
    s.grid = 20;
    s.engines = {Engine::RobinFem};
    CHECK_THROWS_AS(run_field(s), Error);
}

TEST_CASE("single mode output is reproducible without a timestamp") {
    RunSpec s;
    s.engines = {Engine::Formula, Engine::Fem};
    s.points = {{0.0, 0.0}, {-0.5, 0.3}};
    s.timestamp = false;
    auto render = [&] {
        std::ostringstream os;
        write_metadata(os, s);
        write_single_csv(os, run_single(s), 6);
        return os.str();
    };
    const std::string a = render();
    CHECK(a == render());
    CHECK(a.find("generated") == std::string::npos);
    s.timestamp = true;
    std::ostringstream os;
    write_metadata(os, s);
    CHECK(os.str().find("generated") != std::string::npos);
}

TEST_CASE("validation: injected kernel constant fails, skipped groups are reported") {
    RunSpec s;
    s.mode = Mode::Validate;
    s.skip = {"phi", "fem", "table", "mc"};
    const ValidationReport good = run_validate(s);
    CHECK(good.passed());
    s.kernel_reference = 3.0 * std::numbers::ln2 - 6.0;
    const ValidationReport bad = run_validate(s);
    CHECK_FALSE(bad.passed());
    int skipped = 0;
    for (const CheckResult& c : bad.checks) {
        if (c.group == "mc")
            CHECK(c.status == CheckStatus::Skipped);
        skipped += c.status == CheckStatus::Skipped;
    }
    CHECK(skipped >= 4);
    std::ostringstream os;
    write_report(os, bad);
    CHECK(os.str().find("FAIL kernel.double_integral_quadrature") != std::string::npos);
    CHECK(os.str().find("SKIP mc.channel_mean") != std::string::npos);
}
