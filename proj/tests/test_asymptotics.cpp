#include "oracles.hpp"
#include "spine/asymptotics.hpp"
#include "spine/error.hpp"
#include "spine/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace spine;
using std::numbers::pi;

TEST_CASE("double log integral matches quadrature") {
    CHECK(std::abs(log_kernel_double_integral() - oracle::log_double_integral()) < 1e-8);
    CHECK(std::abs(log_kernel_double_integral() - (4.0 * std::numbers::ln2 - 6.0)) < 1e-14);
}

TEST_CASE("L1 closed form matches quadrature at random points") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double t = u(rng);
        CHECK(std::abs(log_kernel_L1(t) - oracle::log_integral(t)) < 1e-8);
    }
    CHECK(log_kernel_L1(1.0) == doctest::Approx(2.0 * std::numbers::ln2 - 2.0));
    CHECK(log_kernel_L1(-1.0) == doctest::Approx(log_kernel_L1(1.0)));
    CHECK_THROWS_AS(log_kernel_L1(1.5), Error);
}

TEST_CASE("phi_disk solves Laplace(phi) = -1") {
    const Vec2 xstar{1.0, 0.0};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> r(0.0, 0.9), a(-pi, pi);
    const double h = 1e-4;
    for (int k = 0; k < 50; ++k) {
        const Vec2 p = polar(r(rng), a(rng));
        auto phi = [&](Vec2 q) { return phi_disk(q, xstar); };
        const double lap = (phi(p + Vec2{h, 0}) + phi(p - Vec2{h, 0}) + phi(p + Vec2{0, h}) + phi(p - Vec2{0, h}) -
                            4.0 * phi(p)) / (h * h);
        CHECK(std::abs(lap + 1.0) < 1e-3);
    }
}

TEST_CASE("phi_disk has zero normal derivative away from x*") {
    const Vec2 xstar{1.0, 0.0};
    const double h = 1e-5;
    for (double ang : {0.5, 1.5, 2.5, 3.0, -2.0, -0.7}) {
        const Vec2 n = polar(1.0, ang);
        const double dn = (phi_disk((1.0 + h) * n, xstar) - phi_disk((1.0 - h) * n, xstar)) / (2.0 * h);
        CHECK(std::abs(dn) < 1e-6);
    }
}

TEST_CASE("phi_disk for radius R reduces to the unit formula") {
    const HeadSpec unit{};
    const Vec2 xs = polar(1.0, 0.4);
    for (Vec2 p : {Vec2{0.1, 0.2}, Vec2{-0.5, 0.3}, Vec2{0.0, -0.8}})
        CHECK(phi_disk(unit, p, xs) == doctest::Approx(phi_disk(p, xs)).epsilon(1e-14));
    CHECK_THROWS_AS(phi_disk(Vec2{1.0, 0.0}, Vec2{1.0, 0.0}), Error);
}

TEST_CASE("phi_numeric agrees with the closed form") {
    const Vec2 xstar{1.0, 0.0};
    const PhiNumeric phi(HeadSpec{}, xstar);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> r(0.0, 0.95), a(-pi, pi);
    for (int k = 0; k < 20; ++k) {
        const Vec2 p = polar(r(rng), a(rng));
        CHECK(std::abs(phi(p) - phi_disk(p, xstar)) < 5e-3);
    }
    const std::vector<double> ds{0.2, 0.1, 0.05, 0.02};
    const auto res = phi.normalization_residuals(ds);
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const Vec2 p{1.0 - ds[k], 0.0};
        CHECK(std::abs(res[k] - (phi_disk(p, xstar) - std::log(ds[k]))) < 5e-3);
        if (k > 0)
            CHECK(std::abs(res[k]) < std::abs(res[k - 1]));
    }
    CHECK_THROWS_AS(phi(xstar), Error);
}

TEST_CASE("phi_numeric on a shifted head of radius 2") {
    const HeadSpec head{{0.5, -0.25}, 2.0};
    const Vec2 xstar = head.center + polar(2.0, 2.0);
    const PhiNumeric phi(head, xstar, {0.008, 4});
    for (Vec2 d : {Vec2{0.0, 0.0}, Vec2{0.7, -0.4}, Vec2{-1.2, 0.5}, Vec2{0.3, 1.1}})
        CHECK(std::abs(phi(head.center + d) - phi_disk(head, head.center + d, xstar)) < 2e-2);
}

TEST_CASE("phi_numeric guards") {
    CHECK_THROWS_AS(PhiNumeric(HeadSpec{}, {1.0, 0.0}, {0.004, 2}), Error);
    CHECK_THROWS_AS(PhiNumeric(HeadSpec{}, {0.9, 0.0}), Error);
    try {
        PhiNumeric(HeadSpec{}, {1.0, 0.0}, {0.05, 4});
        FAIL("coarse mesh accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MeshTooCoarse);
    }
}

TEST_CASE("Robin coefficients and neck profile") {
    const auto [alpha, beta] = robin_coefficients(2.0);
    CHECK(alpha == 0.5);
    CHECK(beta == 1.0);
    const double L = 1.5, C = 3.0;
    CHECK(neck_profile(0.0, C, L) == doctest::Approx(C));
    CHECK(neck_profile(L, C, L) == doctest::Approx(0.0));
    const double h = 1e-4;
    for (double x : {0.2, 0.7, 1.3}) {
        const double second =
            (neck_profile(x + h, C, L) - 2.0 * neck_profile(x, C, L) + neck_profile(x - h, C, L)) / (h * h);
        CHECK(second == doctest::Approx(-1.0).epsilon(1e-5));
    }
}

TEST_CASE("expansion terms") {
    const auto g = build_straight_spine(1.0, 0.1, 1.0);
    const AsymptoticParams p = params_for_spine(g);
    const ExpansionResult r = mfpt_spine(p, {0.0, 0.0});
    CHECK(r.leading == doctest::Approx(pi / (2.0 * 1.0 * 0.1)));
    CHECK(r.log_term == doctest::Approx(1.5 + std::log(5.0)));
    CHECK(r.robin_term == doctest::Approx(0.5));
    CHECK(r.phi_term == doctest::Approx(0.25));
    CHECK(r.value == doctest::Approx(r.leading + r.log_term + r.robin_term + r.phi_term));
    CHECK_FALSE(r.near_window);
    CHECK(mfpt_spine(p, {0.8, 0.0}).near_window);

    // Head-only parameters describe the same reduced problem.
    const auto head = build_head_only(1.0, 0.1, 1.0, 0.5);
    CHECK(mfpt_neumann_robin(params_for_head_only(head), {0.0, 0.0}).value == doctest::Approx(r.value));
}

TEST_CASE("expansion grows with neck length and shrinks with eps") {
    double last = 0.0;
    for (double L : {1.0, 1.5, 2.0, 3.0, 4.0}) {
        const double v = mfpt_spine(params_for_spine(build_straight_spine(1.0, 0.1, L)), {0, 0}).value;
        CHECK(v > last);
        last = v;
    }
    last = 1e300;
    for (double eps : {0.01, 0.02, 0.05, 0.1}) {
        const double v = mfpt_spine(params_for_spine(build_straight_spine(1.0, eps, 2.0)), {0, 0}).value;
        CHECK(v < last);
        last = v;
    }
    const double straight = mfpt_spine(params_for_spine(build_straight_spine(1.0, 0.1, 1.0 + pi)), {0, 0}).value;
    const double curved = mfpt_spine(params_for_spine(build_curved_spine(1.0, 0.1, 1.0, 1.0, 1.0)), {0, 0}).value;
    CHECK(curved > straight);
}

TEST_CASE("window flux integrates to minus the head area") {
    // The L1 correction integrates to zero over the window:
    // 2 (3/2 - ln 2) + (1/2)(4 ln 2 - 6) = 0.
    const auto p = params_for_spine(build_straight_spine(1.0, 0.1, 2.0));
    auto f = [&](double t) { return flux_on_window(p, t); };
    const double total = quad::integrate(f, -p.eps, 0.0) + quad::integrate(f, 0.0, p.eps);
    CHECK(total == doctest::Approx(-pi).epsilon(1e-10));
    CHECK_THROWS_AS(flux_on_window(p, 0.2), Error);
}

TEST_CASE("two-process estimate differs from the expansion by a constant") {
    // At the unit-disk centre: (3/2 + 1/4) - ln(2 pi).
    for (double L : {1.0, 2.0, 4.0}) {
        const auto p = params_for_spine(build_straight_spine(1.0, 0.05, L));
        const double diff = mfpt_spine(p, {0, 0}).value - mfpt_reference_hs(p);
        CHECK(diff == doctest::Approx(1.75 - std::log(2.0 * pi)).epsilon(1e-12));
    }
}
