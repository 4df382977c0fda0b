#include "spine/sparse.hpp"

#include "spine/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spine {

int CsrMatrix::find(int i, int j) const {
    const auto first = col.begin() + row_ptr[i];
    const auto last = col.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j)
        return -1;
    return static_cast<int>(it - col.begin());
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(rows, 0.0);
    for (int i = 0; i < rows; ++i) {
        const int k = find(i, i);
        if (k >= 0)
            d[i] = val[k];
    }
    return d;
}

CsrMatrix csr_from_triplets(int rows, std::vector<Triplet> entries) {
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.rows = rows;
    m.row_ptr.assign(rows + 1, 0);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Triplet& t = entries[k];
        if (!m.col.empty() && k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
            m.val.back() += t.value;
            continue;
        }
        m.col.push_back(t.col);
        m.val.push_back(t.value);
        ++m.row_ptr[t.row + 1];
    }
    for (int i = 0; i < rows; ++i)
        m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

namespace kernels {

namespace serial {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    for (int i = 0; i < a.rows; ++i) {
        double sum = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            sum += a.val[k] * x[a.col[k]];
        y[i] = sum;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        sum += x[i] * y[i];
    return sum;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = x[i] + beta * y[i];
}

void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] * y[i];
}

} // namespace serial

namespace omp {

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    const int n = a.rows;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            sum += a.val[k] * x[a.col[k]];
        y[i] = sum;
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    const long n = static_cast<long>(x.size());
    double sum = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : sum)
    for (long i = 0; i < n; ++i)
        sum += x[i] * y[i];
    return sum;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    const long n = static_cast<long>(x.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i)
        y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
    const long n = static_cast<long>(x.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i)
        y[i] = x[i] + beta * y[i];
}

void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out) {
    const long n = static_cast<long>(x.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i)
        out[i] = x[i] * y[i];
}

} // namespace omp

} // namespace kernels

namespace {

template <class K>
CgResult run_cg(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                const CgOptions& opts) {
    const std::size_t n = b.size();
    const std::size_t cap =
        opts.max_iter ? opts.max_iter
                      : static_cast<std::size_t>(std::ceil(50.0 * std::sqrt(static_cast<double>(n))));

    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag)
        d = d > 0.0 ? 1.0 / d : 1.0;

    std::vector<double> r(n), z(n), p(n), ap(n);
    K::spmv(a, x, ap);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = b[i] - ap[i];

    const double bnorm = std::sqrt(K::dot(b, b));
    CgResult res;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return res;
    }
    double rnorm = std::sqrt(K::dot(r, r));
    res.rel_residual = rnorm / bnorm;
    if (res.rel_residual <= opts.rel_tol)
        return res;

    K::hadamard(inv_diag, r, z);
    std::copy(z.begin(), z.end(), p.begin());
    double rz = K::dot(r, z);
    for (std::size_t it = 1; it <= cap; ++it) {
        K::spmv(a, p, ap);
        const double pap = K::dot(p, ap);
        if (!(pap > 0.0))
            throw Error(Errc::SingularSystem, "conjugate gradients met a non-positive curvature");
        const double step = rz / pap;
        K::axpy(step, p, x);
        K::axpy(-step, ap, r);
        rnorm = std::sqrt(K::dot(r, r));
        res.iterations = it;
        res.rel_residual = rnorm / bnorm;
        if (res.rel_residual <= opts.rel_tol)
            return res;
        K::hadamard(inv_diag, r, z);
        const double rz_new = K::dot(r, z);
        K::xpby(z, rz_new / rz, p);
        rz = rz_new;
    }
    std::ostringstream os;
    os << "conjugate gradients stopped after " << cap << " iterations at relative residual "
       << res.rel_residual;
    throw Error(Errc::NoConvergence, os.str());
}

struct SerialKernels {
    static void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
        kernels::serial::spmv(a, x, y);
    }
    static double dot(std::span<const double> x, std::span<const double> y) {
        return kernels::serial::dot(x, y);
    }
    static void axpy(double s, std::span<const double> x, std::span<double> y) {
        kernels::serial::axpy(s, x, y);
    }
    static void xpby(std::span<const double> x, double s, std::span<double> y) {
        kernels::serial::xpby(x, s, y);
    }
    static void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> o) {
        kernels::serial::hadamard(x, y, o);
    }
};

struct OmpKernels {
    static void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
        kernels::omp::spmv(a, x, y);
    }
    static double dot(std::span<const double> x, std::span<const double> y) {
        return kernels::omp::dot(x, y);
    }
    static void axpy(double s, std::span<const double> x, std::span<double> y) {
        kernels::omp::axpy(s, x, y);
    }
    static void xpby(std::span<const double> x, double s, std::span<double> y) {
        kernels::omp::xpby(x, s, y);
    }
    static void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> o) {
        kernels::omp::hadamard(x, y, o);
    }
};

} // namespace

CgResult solve_cg(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                  const CgOptions& opts) {
    if (opts.policy == ExecPolicy::Serial)
        return run_cg<SerialKernels>(a, b, x, opts);
    return run_cg<OmpKernels>(a, b, x, opts);
}

} // namespace spine
