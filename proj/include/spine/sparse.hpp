#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spine {

enum class ExecPolicy { Serial, Parallel };

/// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
    int rows = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> col;
    std::vector<double> val;

    std::size_t nnz() const { return val.size(); }
    /// Index into val/col of entry (i, j); -1 when absent.
    int find(int i, int j) const;
    std::vector<double> diagonal() const;
};

struct Triplet {
    int row;
    int col;
    double value;
};

/// Builds a CSR matrix, summing duplicate entries.
CsrMatrix csr_from_triplets(int rows, std::vector<Triplet> entries);

namespace kernels {

// Reference versions; the OpenMP versions below must agree with these up to
// floating-point reassociation in the reductions.
namespace serial {
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y); // y = x + beta y
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out);
} // namespace serial

namespace omp {
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void hadamard(std::span<const double> x, std::span<const double> y, std::span<double> out);
} // namespace omp

} // namespace kernels

struct CgOptions {
    double rel_tol = 1e-10;
    std::size_t max_iter = 0; // 0: 50 * sqrt(N)
    ExecPolicy policy = ExecPolicy::Parallel;
};

struct CgResult {
    std::size_t iterations = 0;
    double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// (semi)definite systems. `x` holds the initial guess on entry. Throws
/// Errc::NoConvergence when the iteration cap is hit.
CgResult solve_cg(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                  const CgOptions& opts = {});

} // namespace spine
