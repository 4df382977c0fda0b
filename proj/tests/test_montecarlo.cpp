#include "spine/asymptotics.hpp"
#include "spine/error.hpp"
#include "spine/montecarlo.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace spine;

namespace {

WalkConfig config(double dt, std::size_t walkers, std::uint64_t seed) {
    WalkConfig c;
    c.dt = dt;
    c.walkers = walkers;
    c.seed = seed;
    return c;
}

double combined(const MfptEstimate& a, const MfptEstimate& b) {
    return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

} // namespace

TEST_CASE("same seed gives bitwise identical estimates") {
    const auto g = build_channel(0.1, 0.5);
    const WalkConfig c = config(1e-4, 300, 42);
    const MfptEstimate a = simulate_mfpt(g, c, {0.0, 0.0});
    const MfptEstimate b = simulate_mfpt(g, c, {0.0, 0.0});
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    const MfptEstimate other = simulate_mfpt(g, config(1e-4, 300, 43), {0.0, 0.0});
    CHECK(other.mean != a.mean);
}

TEST_CASE("serial and parallel runs agree exactly") {
    const auto g = build_straight_spine(1.0, 0.2, 0.5);
    WalkConfig c = config(2e-4, 200, 5);
    c.policy = ExecPolicy::Serial;
    const MfptEstimate s = simulate_mfpt(g, c, {0.2, 0.1});
    c.policy = ExecPolicy::Parallel;
    const MfptEstimate p = simulate_mfpt(g, c, {0.2, 0.1});
    CHECK(s.mean == p.mean);
    CHECK(s.std_error == p.std_error);
    CHECK(s.n_absorbed == p.n_absorbed);
}

TEST_CASE("walker streams make up the estimate") {
    const auto g = build_channel(0.1, 0.3);
    const WalkConfig c = config(1e-4, 50, 9);
    const MfptEstimate e = simulate_mfpt(g, c, {0.05, 0.0}, 3);
    double sum = 0.0;
    for (std::uint64_t w = 0; w < c.walkers; ++w)
        sum += walker_exit_time(g, c, {0.05, 0.0}, 3, w).value();
    CHECK(e.mean == doctest::Approx(sum / 50.0).epsilon(1e-12));
}

TEST_CASE("short channel: exact mean and time-step halving") {
    // u(0) = L^2 / 2 for the 1D problem.
    const double L = 0.5;
    const auto g = build_channel(0.1, L);
    const MfptEstimate a = simulate_mfpt(g, config(1e-4, 8000, 1), {0.0, 0.0});
    const MfptEstimate b = simulate_mfpt(g, config(5e-5, 8000, 2), {0.0, 0.0});
    MESSAGE("dt 1e-4: " << a.mean << " +- " << a.std_error << ", dt 5e-5: " << b.mean << " +- " << b.std_error);
    CHECK(std::abs(a.mean - b.mean) < 3.0 * combined(a, b));
    CHECK(std::abs(b.mean - 0.5 * L * L) < 3.0 * b.std_error);
    CHECK_FALSE(a.censored);
}

TEST_CASE("mirror-symmetric starts give matching estimates") {
    const auto g = build_straight_spine(1.0, 0.2, 0.5);
    const MfptEstimate up = simulate_mfpt(g, config(2e-4, 1500, 21), {-0.3, 0.5});
    const MfptEstimate down = simulate_mfpt(g, config(2e-4, 1500, 22), {-0.3, -0.5});
    CHECK(std::abs(up.mean - down.mean) < 3.0 * combined(up, down));
}

TEST_CASE("field decreases toward the window and spans like the expansion") {
    const auto g = build_straight_spine(1.0, 0.2, 0.5);
    WalkConfig c = config(2e-4, 600, 77);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i)
            c.starts.push_back({-0.6 + 0.3 * i, -0.6 + 0.3 * j});
    const auto field = simulate_field(g, c);
    REQUIRE(field.size() == 25);
    // Row j = 2 is the head axis, running toward the window.
    for (int i = 0; i + 1 < 5; ++i) {
        const MfptEstimate& a = field[10 + i].estimate;
        const MfptEstimate& b = field[10 + i + 1].estimate;
        CHECK(b.mean <= a.mean + 3.0 * combined(a, b));
    }
    const AsymptoticParams p = params_for_spine(g);
    double lo = 1e300, hi = -1e300, flo = 1e300, fhi = -1e300;
    for (const FieldSample& s : field) {
        lo = std::min(lo, s.estimate.mean);
        hi = std::max(hi, s.estimate.mean);
        const double f = mfpt_spine(p, s.point).value;
        flo = std::min(flo, f);
        fhi = std::max(fhi, f);
    }
    MESSAGE("mc span " << hi - lo << ", expansion span " << fhi - flo);
    CHECK(std::abs((hi - lo) - (fhi - flo)) <= 0.5);
}

TEST_CASE("configuration errors") {
    const auto g = build_straight_spine(1.0, 0.1, 1.0);
    try {
        simulate_mfpt(g, config(2e-3, 10, 1), {0, 0});
        FAIL("expected StepTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::StepTooLarge);
    }
    CHECK_THROWS_AS(simulate_mfpt(build_head_only(1.0, 0.1, 1.0, 0.5), config(1e-5, 10, 1), {0, 0}), Error);
    CHECK_THROWS_AS(simulate_mfpt(g, config(1e-5, 0, 1), {0, 0}), Error);
    WalkConfig c = config(1e-4, 10, 1);
    c.starts = {{0.0, 0.0}, {0.5, 0.5}, {3.0, 0.0}};
    try {
        simulate_field(g, c);
        FAIL("expected OutsideDomain");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::OutsideDomain);
        CHECK(std::string(e.what()).find("start 2") != std::string::npos);
    }
    c.starts.clear();
    CHECK_THROWS_AS(simulate_field(g, c), Error);
}

TEST_CASE("censoring is counted and flagged") {
    WalkConfig c = config(1e-4, 100, 3);
    c.max_steps = 10;
    const MfptEstimate e = simulate_mfpt(build_channel(0.1, 1.0), c, {0.0, 0.0});
    CHECK(e.n_censored == 100);
    CHECK(e.censored);
    CHECK(default_max_steps(100) == 10000000);
    CHECK(default_max_steps(10) == 100000000);
}

TEST_CASE("field CSV") {
    std::vector<FieldSample> s = {{{0.1, 0.2}, {1.5, 0.1, 10, 0, false}}};
    std::ostringstream os;
    write_field_csv(os, s);
    CHECK(os.str() == "x,y,mfpt,stderr,n_absorbed,n_censored\n0.1,0.2,1.5,0.1,10,0\n");
}
