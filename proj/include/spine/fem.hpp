#pragma once

#include "spine/mesh.hpp"
#include "spine/sparse.hpp"

#include <memory>
#include <span>
#include <vector>

namespace spine {

enum class ProblemKind { Escape, NeumannRobin, PureNeumann };

struct FieldMeta {
    ProblemKind problem = ProblemKind::Escape;
    double eps = 0.0;
    double neck_length = 0.0;
    double h = 0.0;
    std::size_t cg_iterations = 0;
    double cg_residual = 0.0;
};

class TriangleLocator;

/// Nodal P1 solution on an immutable mesh.
class ScalarField {
public:
    ScalarField(std::shared_ptr<const Mesh> mesh, std::vector<double> values, FieldMeta meta);

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    std::span<const double> values() const { return values_; }
    const FieldMeta& meta() const { return meta_; }

    /// Barycentric interpolation on the containing triangle (lowest index on
    /// ties). Points outside the mesh but within the boundary chord tolerance
    /// are projected onto the nearest triangle; anything else throws
    /// Errc::OutsideDomain.
    double evaluate(Vec2 p) const;

    double min_value() const;

private:
    std::shared_ptr<const Mesh> mesh_;
    std::vector<double> values_;
    FieldMeta meta_;
    std::shared_ptr<const TriangleLocator> locator_;
};

/// Reduced linear system: Dirichlet nodes are eliminated symmetrically.
struct FemSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
    std::vector<int> dof_of_node; // -1 on Dirichlet nodes (value 0)
    int dofs = 0;
};

/// -Laplace(u) = source, u = 0 on absorbing edges, du/dn = 0 on reflecting
/// edges, du/dn + alpha u = beta on Robin edges.
FemSystem assemble_system(const Mesh& mesh, double source, double alpha, double beta,
                          ExecPolicy policy = ExecPolicy::Parallel);

/// Relative residual ||A u - b|| / ||b|| of nodal values against the system.
double relative_residual(const FemSystem& sys, std::span<const double> nodal);

struct SolveOptions {
    CgOptions cg{};
    ExecPolicy assembly = ExecPolicy::Parallel;
};

ScalarField solve_escape(std::shared_ptr<const Mesh> mesh, const SolveOptions& opts = {});

/// Robin problem on the window edges; `source` scales the unit load (used to
/// isolate the Robin response in linearity checks).
ScalarField solve_neumann_robin(std::shared_ptr<const Mesh> mesh, double alpha, double beta,
                                const SolveOptions& opts = {}, double source = 1.0);

struct WindowFlux {
    std::vector<double> t;       // signed arclength of each window node from x*
    std::vector<double> flux;    // outward normal derivative at the node
    std::vector<double> weight;  // lumped boundary length of the node
    double total = 0.0;          // integral of the flux over the window
    double gradient_total = 0.0; // same integral from element gradients
};

/// Outward normal derivative of the field on the head window, seen from the
/// head. Nodal fluxes come from the weak form on the head triangles,
/// lambda_i = a(u, phi_i) - (source, phi_i), and the pointwise profile solves
/// the window mass system against lambda. `source` must match the solve.
WindowFlux window_flux(const ScalarField& field, double source = 1.0);

enum class Problem { Escape, NeumannRobin };

struct Extrapolation {
    std::vector<double> h;
    std::vector<double> values;
    double extrapolated = 0.0;
    double observed_order = 0.0;
    bool monotone = false; // successive differences shrink in magnitude
};

/// Richardson extrapolation from the last three levels. The observed order
/// comes from the ratio of successive differences; when the differences do
/// not shrink the second-order estimate is used instead.
Extrapolation richardson(std::span<const double> h, std::span<const double> values);

/// Solves on each mesh size (strictly decreasing, at least three) and
/// extrapolates the value at `p`.
Extrapolation refine_and_extrapolate(const SpineGeometry& g, Problem problem, Vec2 p,
                                     std::span<const double> h_list, const MeshOptions& mesh_opts = {},
                                     const SolveOptions& opts = {});

/// Same, for several points sharing the solves.
std::vector<Extrapolation> refine_and_extrapolate(const SpineGeometry& g, Problem problem,
                                                  std::span<const Vec2> points,
                                                  std::span<const double> h_list,
                                                  const MeshOptions& mesh_opts = {},
                                                  const SolveOptions& opts = {});

} // namespace spine
