#include "spine/error.hpp"
#include "spine/sparse.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spine;

namespace {

// Tridiagonal 1D Dirichlet Laplacian, n interior nodes.
CsrMatrix laplacian_1d(int n) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0)
            t.push_back({i, i - 1, -1.0});
        if (i + 1 < n)
            t.push_back({i, i + 1, -1.0});
    }
    return csr_from_triplets(n, t);
}

std::vector<double> random_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v)
        x = u(rng);
    return v;
}

} // namespace

TEST_CASE("triplets merge into sorted CSR") {
    const CsrMatrix a = csr_from_triplets(2, {{1, 1, 1.0}, {0, 1, 2.0}, {0, 0, 3.0}, {0, 1, 4.0}});
    CHECK(a.nnz() == 3);
    CHECK(a.val[a.find(0, 1)] == 6.0);
    CHECK(a.val[a.find(0, 0)] == 3.0);
    CHECK(a.find(1, 0) == -1);
    CHECK(a.diagonal() == std::vector<double>{3.0, 1.0});
    CHECK(a.col[0] < a.col[1]);
}

TEST_CASE("OpenMP kernels agree with the serial reference") {
    const int n = 5000;
    const CsrMatrix a = laplacian_1d(n);
    const auto x = random_vector(n, 1), y = random_vector(n, 2);

    std::vector<double> s(n), p(n);
    kernels::serial::spmv(a, x, s);
    kernels::omp::spmv(a, x, p);
    CHECK(s == p);

    const double ds = kernels::serial::dot(x, y), dp = kernels::omp::dot(x, y);
    CHECK(std::abs(ds - dp) <= 1e-12 * std::abs(ds) + 1e-14);

    auto s2 = y, p2 = y;
    kernels::serial::axpy(0.3, x, s2);
    kernels::omp::axpy(0.3, x, p2);
    CHECK(s2 == p2);
    kernels::serial::xpby(x, -1.7, s2);
    kernels::omp::xpby(x, -1.7, p2);
    CHECK(s2 == p2);
    kernels::serial::hadamard(x, y, s);
    kernels::omp::hadamard(x, y, p);
    CHECK(s == p);
}

TEST_CASE("CG solves the 1D Poisson problem") {
    // -u'' = 1 on (0, 1), u(0) = u(1) = 0: nodal values are exact.
    const int n = 199;
    const double h = 1.0 / (n + 1);
    const CsrMatrix a = laplacian_1d(n);
    std::vector<double> b(n, h * h), x(n, 0.0);
    for (ExecPolicy pol : {ExecPolicy::Serial, ExecPolicy::Parallel}) {
        std::fill(x.begin(), x.end(), 0.0);
        const CgResult r = solve_cg(a, b, x, {1e-12, 0, pol});
        CHECK(r.rel_residual <= 1e-12);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = (i + 1) * h;
            worst = std::max(worst, std::abs(x[i] - 0.5 * t * (1.0 - t)));
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("CG reports non-convergence") {
    const CsrMatrix a = laplacian_1d(400);
    std::vector<double> b(400, 1.0), x(400, 0.0);
    try {
        solve_cg(a, b, x, {1e-12, 3});
        FAIL("expected NoConvergence");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NoConvergence);
    }
}
