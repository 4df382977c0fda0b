#include "spine/fem.hpp"

#include "spine/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spine {

class TriangleLocator {
public:
    explicit TriangleLocator(const Mesh& m) : mesh_(m) {
        lo_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
        hi_ = {-lo_.x, -lo_.y};
        for (Vec2 v : m.vertices) {
            lo_ = {std::min(lo_.x, v.x), std::min(lo_.y, v.y)};
            hi_ = {std::max(hi_.x, v.x), std::max(hi_.y, v.y)};
        }
        const double w = std::max(hi_.x - lo_.x, 1e-300);
        const double h = std::max(hi_.y - lo_.y, 1e-300);
        const double cells = std::max(1.0, static_cast<double>(m.triangles.size()) / 4.0);
        const double size = std::sqrt(w * h / cells);
        nx_ = std::clamp(static_cast<int>(w / size) + 1, 1, 4096);
        ny_ = std::clamp(static_cast<int>(h / size) + 1, 1, 4096);
        buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
        for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
            const auto& tri = m.triangles[t];
            Vec2 a = m.vertices[tri[0]], b = m.vertices[tri[1]], c = m.vertices[tri[2]];
            const auto [i0, j0] = cell({std::min({a.x, b.x, c.x}), std::min({a.y, b.y, c.y})});
            const auto [i1, j1] = cell({std::max({a.x, b.x, c.x}), std::max({a.y, b.y, c.y})});
            for (int i = i0; i <= i1; ++i)
                for (int j = j0; j <= j1; ++j)
                    buckets_[index(i, j)].push_back(t);
        }
    }

    struct Hit {
        int triangle = -1;
        double bary[3] = {0, 0, 0};
        double distance = 0.0;
    };

    Hit find(Vec2 p, double tolerance) const {
        Hit best;
        best.distance = std::numeric_limits<double>::max();
        const auto [ci, cj] = cell(p);
        // Exact containment in the bucket holding p; bucket lists are in
        // ascending triangle order so ties go to the smallest index.
        for (int t : buckets_[index(ci, cj)]) {
            Hit h = barycentric(t, p);
            if (h.bary[0] >= -1e-12 && h.bary[1] >= -1e-12 && h.bary[2] >= -1e-12) {
                h.distance = 0.0;
                return h;
            }
        }
        if (tolerance <= 0.0)
            return {};
        const int reach = 1 + static_cast<int>(tolerance / std::min(cell_w(), cell_h()));
        for (int i = std::max(0, ci - reach); i <= std::min(nx_ - 1, ci + reach); ++i)
            for (int j = std::max(0, cj - reach); j <= std::min(ny_ - 1, cj + reach); ++j)
                for (int t : buckets_[index(i, j)]) {
                    Hit h = closest(t, p);
                    if (h.distance < best.distance || (h.distance == best.distance && t < best.triangle))
                        best = h;
                }
        if (best.distance > tolerance)
            return {};
        return best;
    }

private:
    double cell_w() const { return (hi_.x - lo_.x) / nx_; }
    double cell_h() const { return (hi_.y - lo_.y) / ny_; }

    std::pair<int, int> cell(Vec2 p) const {
        const int i = static_cast<int>((p.x - lo_.x) / std::max(cell_w(), 1e-300));
        const int j = static_cast<int>((p.y - lo_.y) / std::max(cell_h(), 1e-300));
        return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
    }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * ny_ + j; }

    Hit barycentric(int t, Vec2 p) const {
        const auto& tri = mesh_.triangles[t];
        const Vec2 a = mesh_.vertices[tri[0]], b = mesh_.vertices[tri[1]], c = mesh_.vertices[tri[2]];
        const double area2 = cross(b - a, c - a);
        Hit h;
        h.triangle = t;
        h.bary[0] = cross(b - p, c - p) / area2;
        h.bary[1] = cross(c - p, a - p) / area2;
        h.bary[2] = 1.0 - h.bary[0] - h.bary[1];
        return h;
    }

    Hit closest(int t, Vec2 p) const {
        Hit h = barycentric(t, p);
        if (h.bary[0] >= 0.0 && h.bary[1] >= 0.0 && h.bary[2] >= 0.0) {
            h.distance = 0.0;
            return h;
        }
        const auto& tri = mesh_.triangles[t];
        h.distance = std::numeric_limits<double>::max();
        for (int e = 0; e < 3; ++e) {
            const Vec2 a = mesh_.vertices[tri[e]];
            const Vec2 b = mesh_.vertices[tri[(e + 1) % 3]];
            const double s = std::clamp(dot(p - a, b - a) / norm2(b - a), 0.0, 1.0);
            const double d = distance(p, a + s * (b - a));
            if (d < h.distance) {
                h.distance = d;
                h.bary[e] = 1.0 - s;
                h.bary[(e + 1) % 3] = s;
                h.bary[(e + 2) % 3] = 0.0;
            }
        }
        return h;
    }

    const Mesh& mesh_;
    Vec2 lo_{}, hi_{};
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

ScalarField::ScalarField(std::shared_ptr<const Mesh> mesh, std::vector<double> values, FieldMeta meta)
    : mesh_(std::move(mesh)), values_(std::move(values)), meta_(meta),
      locator_(std::make_shared<TriangleLocator>(*mesh_)) {}

double ScalarField::evaluate(Vec2 p) const {
    const double tol = 2.0 * mesh_->boundary_tolerance + 1e-12;
    const auto hit = locator_->find(p, tol);
    if (hit.triangle < 0) {
        std::ostringstream os;
        os << "point (" << p.x << ", " << p.y << ") is outside the mesh";
        throw Error(Errc::OutsideDomain, os.str());
    }
    const auto& tri = mesh_->triangles[hit.triangle];
    return hit.bary[0] * values_[tri[0]] + hit.bary[1] * values_[tri[1]] + hit.bary[2] * values_[tri[2]];
}

double ScalarField::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

namespace {

struct ElementMatrix {
    int node[3];
    double k[3][3];
    double load[3];
};

ElementMatrix element(const Mesh& m, int t, double source) {
    const auto& tri = m.triangles[t];
    const Vec2 p[3] = {m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]};
    const double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
    double b[3], c[3];
    for (int i = 0; i < 3; ++i) {
        const Vec2 pj = p[(i + 1) % 3], pk = p[(i + 2) % 3];
        b[i] = pj.y - pk.y;
        c[i] = pk.x - pj.x;
    }
    ElementMatrix e;
    for (int i = 0; i < 3; ++i) {
        e.node[i] = tri[i];
        e.load[i] = source * area / 3.0;
        for (int j = 0; j < 3; ++j)
            e.k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
    }
    return e;
}

} // namespace

FemSystem assemble_system(const Mesh& mesh, double source, double alpha, double beta, ExecPolicy policy) {
    const int nv = static_cast<int>(mesh.vertices.size());
    const int nt = static_cast<int>(mesh.triangles.size());
    FemSystem sys;
    sys.dof_of_node.assign(nv, 0);
    for (const auto& e : mesh.boundary_edges)
        if (e.kind == BoundaryKind::Absorbing)
            sys.dof_of_node[e.a] = sys.dof_of_node[e.b] = -1;
    int next = 0;
    for (int& d : sys.dof_of_node)
        if (d == 0)
            d = next++;
    sys.dofs = next;

    // Element contributions land in disjoint slots, so the parallel and the
    // serial pass produce identical arrays; the merge below is serial.
    std::vector<ElementMatrix> elems(nt);
    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < nt; ++t)
            elems[t] = element(mesh, t, source);
    } else {
        for (int t = 0; t < nt; ++t)
            elems[t] = element(mesh, t, source);
    }

    std::vector<Triplet> trip;
    trip.reserve(9 * static_cast<std::size_t>(nt) + 4 * mesh.boundary_edges.size());
    sys.rhs.assign(sys.dofs, 0.0);
    for (const ElementMatrix& e : elems)
        for (int i = 0; i < 3; ++i) {
            const int di = sys.dof_of_node[e.node[i]];
            if (di < 0)
                continue;
            sys.rhs[di] += e.load[i];
            for (int j = 0; j < 3; ++j) {
                const int dj = sys.dof_of_node[e.node[j]];
                if (dj >= 0)
                    trip.push_back({di, dj, e.k[i][j]});
            }
        }
    for (const auto& e : mesh.boundary_edges) {
        if (e.kind != BoundaryKind::Robin)
            continue;
        const double len = distance(mesh.vertices[e.a], mesh.vertices[e.b]);
        const int da = sys.dof_of_node[e.a], db = sys.dof_of_node[e.b];
        // Two-point Gauss is exact for the linear-times-linear edge mass.
        trip.push_back({da, da, alpha * len / 3.0});
        trip.push_back({db, db, alpha * len / 3.0});
        trip.push_back({da, db, alpha * len / 6.0});
        trip.push_back({db, da, alpha * len / 6.0});
        sys.rhs[da] += beta * len / 2.0;
        sys.rhs[db] += beta * len / 2.0;
    }
    sys.matrix = csr_from_triplets(sys.dofs, std::move(trip));
    return sys;
}

double relative_residual(const FemSystem& sys, std::span<const double> nodal) {
    std::vector<double> x(sys.dofs);
    for (std::size_t n = 0; n < sys.dof_of_node.size(); ++n)
        if (sys.dof_of_node[n] >= 0)
            x[sys.dof_of_node[n]] = nodal[n];
    std::vector<double> ax(sys.dofs);
    kernels::serial::spmv(sys.matrix, x, ax);
    double r2 = 0.0, b2 = 0.0;
    for (int i = 0; i < sys.dofs; ++i) {
        r2 += (ax[i] - sys.rhs[i]) * (ax[i] - sys.rhs[i]);
        b2 += sys.rhs[i] * sys.rhs[i];
    }
    return std::sqrt(r2 / b2);
}

namespace {

ScalarField solve_system(std::shared_ptr<const Mesh> mesh, const FemSystem& sys, FieldMeta meta,
                         const SolveOptions& opts) {
    std::vector<double> x(sys.dofs, 0.0);
    const CgResult res = solve_cg(sys.matrix, sys.rhs, x, opts.cg);
    std::vector<double> nodal(sys.dof_of_node.size(), 0.0);
    for (std::size_t n = 0; n < nodal.size(); ++n)
        if (sys.dof_of_node[n] >= 0)
            nodal[n] = x[sys.dof_of_node[n]];
    meta.cg_iterations = res.iterations;
    meta.cg_residual = res.rel_residual;
    meta.h = mesh->h;
    return ScalarField(std::move(mesh), std::move(nodal), meta);
}

} // namespace

ScalarField solve_escape(std::shared_ptr<const Mesh> mesh, const SolveOptions& opts) {
    const bool has_dirichlet = std::any_of(mesh->boundary_edges.begin(), mesh->boundary_edges.end(),
                                           [](const BoundaryEdge& e) { return e.kind == BoundaryKind::Absorbing; });
    if (!has_dirichlet)
        throw Error(Errc::SingularSystem, "escape problem needs an absorbing edge");
    const FemSystem sys = assemble_system(*mesh, 1.0, 0.0, 0.0, opts.assembly);
    FieldMeta meta;
    meta.problem = ProblemKind::Escape;
    return solve_system(std::move(mesh), sys, meta, opts);
}

ScalarField solve_neumann_robin(std::shared_ptr<const Mesh> mesh, double alpha, double beta,
                                const SolveOptions& opts, double source) {
    const bool has_robin = std::any_of(mesh->boundary_edges.begin(), mesh->boundary_edges.end(),
                                       [](const BoundaryEdge& e) { return e.kind == BoundaryKind::Robin; });
    const bool has_dirichlet = std::any_of(mesh->boundary_edges.begin(), mesh->boundary_edges.end(),
                                           [](const BoundaryEdge& e) { return e.kind == BoundaryKind::Absorbing; });
    if (!has_dirichlet && (!has_robin || !(alpha > 0.0)))
        throw Error(Errc::SingularSystem, "Robin problem needs a Robin edge with alpha > 0");
    const FemSystem sys = assemble_system(*mesh, source, alpha, beta, opts.assembly);
    FieldMeta meta;
    meta.problem = ProblemKind::NeumannRobin;
    return solve_system(std::move(mesh), sys, meta, opts);
}

WindowFlux window_flux(const ScalarField& field, double source) {
    const Mesh& m = field.mesh();
    const auto u = field.values();
    WindowFlux out;
    if (m.window_edges.empty())
        return out;

    std::vector<int> nodes;
    nodes.push_back(m.window_edges.front().a);
    for (const WindowEdge& w : m.window_edges)
        nodes.push_back(w.b);
    std::vector<int> slot(m.vertices.size(), -1);
    for (std::size_t k = 0; k < nodes.size(); ++k)
        slot[nodes[k]] = static_cast<int>(k);

    const int head = m.head_triangles > 0 ? m.head_triangles : static_cast<int>(m.triangles.size());
    std::vector<double> lambda(nodes.size(), 0.0);
    for (int t = 0; t < head; ++t) {
        const auto& tri = m.triangles[t];
        if (slot[tri[0]] < 0 && slot[tri[1]] < 0 && slot[tri[2]] < 0)
            continue;
        const ElementMatrix e = element(m, t, source);
        for (int i = 0; i < 3; ++i) {
            const int k = slot[e.node[i]];
            if (k < 0)
                continue;
            double r = -e.load[i];
            for (int j = 0; j < 3; ++j)
                r += e.k[i][j] * u[e.node[j]];
            lambda[k] += r;
        }
    }

    // Consistent window mass matrix is tridiagonal; Thomas algorithm.
    const std::size_t n = nodes.size();
    std::vector<double> diag(n, 0.0), off(n, 0.0);
    out.weight.assign(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double len = distance(m.vertices[nodes[k]], m.vertices[nodes[k + 1]]);
        diag[k] += len / 3.0;
        diag[k + 1] += len / 3.0;
        off[k] = len / 6.0;
        out.weight[k] += len / 2.0;
        out.weight[k + 1] += len / 2.0;
    }
    std::vector<double> c(n, 0.0), q(lambda);
    double b0 = diag[0];
    c[0] = off[0] / b0;
    q[0] /= b0;
    for (std::size_t k = 1; k < n; ++k) {
        const double den = diag[k] - off[k - 1] * c[k - 1];
        c[k] = k + 1 < n ? off[k] / den : 0.0;
        q[k] = (q[k] - off[k - 1] * q[k - 1]) / den;
    }
    for (std::size_t k = n - 1; k-- > 0;)
        q[k] -= c[k] * q[k + 1];

    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 d = m.vertices[nodes[k]] - m.head.center;
        out.t.push_back(m.head.radius * std::atan2(d.y, d.x));
        out.flux.push_back(q[k]);
        out.total += lambda[k];
    }

    for (const WindowEdge& w : m.window_edges) {
        const auto& tri = m.triangles[w.triangle];
        const Vec2 p[3] = {m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]};
        const double area2 = cross(p[1] - p[0], p[2] - p[0]);
        Vec2 grad{};
        for (int i = 0; i < 3; ++i) {
            const Vec2 pj = p[(i + 1) % 3], pk = p[(i + 2) % 3];
            grad += (u[tri[i]] / area2) * Vec2{pj.y - pk.y, pk.x - pj.x};
        }
        const Vec2 d = m.vertices[w.b] - m.vertices[w.a];
        out.gradient_total += dot(grad, Vec2{d.y, -d.x});
    }
    return out;
}

Extrapolation richardson(std::span<const double> h, std::span<const double> values) {
    if (h.size() < 3 || h.size() != values.size())
        throw Error(Errc::DomainError, "Richardson extrapolation needs at least three levels");
    Extrapolation e;
    e.h.assign(h.begin(), h.end());
    e.values.assign(values.begin(), values.end());
    const std::size_t n = values.size();
    e.monotone = true;
    for (std::size_t k = 2; k < n; ++k)
        if (std::abs(values[k] - values[k - 1]) >= std::abs(values[k - 1] - values[k - 2]))
            e.monotone = false;
    const double d1 = values[n - 2] - values[n - 3];
    const double d2 = values[n - 1] - values[n - 2];
    const double r1 = h[n - 3] / h[n - 2];
    const double r2 = h[n - 2] / h[n - 1];
    double order = 2.0;
    if (d1 != 0.0 && d2 != 0.0 && d1 * d2 > 0.0 && std::abs(d2) < std::abs(d1))
        order = std::log(d1 / d2) / std::log(0.5 * (r1 + r2));
    e.observed_order = order;
    const double used = std::clamp(order, 0.5, 4.0);
    e.extrapolated = values[n - 1] + d2 / (std::pow(r2, used) - 1.0);
    return e;
}

std::vector<Extrapolation> refine_and_extrapolate(const SpineGeometry& g, Problem problem,
                                                  std::span<const Vec2> points,
                                                  std::span<const double> h_list,
                                                  const MeshOptions& mesh_opts, const SolveOptions& opts) {
    if (h_list.size() < 3)
        throw Error(Errc::DomainError, "refinement needs at least three mesh sizes");
    for (std::size_t k = 1; k < h_list.size(); ++k)
        if (!(h_list[k] < h_list[k - 1]))
            throw Error(Errc::DomainError, "mesh sizes must be strictly decreasing");
    if (problem == Problem::NeumannRobin && !g.robin())
        throw Error(Errc::SingularSystem, "Robin problem needs a Robin window");
    if (problem == Problem::Escape && g.kind() == DomainKind::HeadOnly)
        throw Error(Errc::SingularSystem, "escape problem needs an absorbing neck end");
    std::vector<std::vector<double>> values(points.size());
    std::vector<double> used_h;
    for (double h : h_list) {
        auto mesh = std::make_shared<const Mesh>(generate_mesh(g, h, mesh_opts));
        used_h.push_back(mesh->h);
        const ScalarField f = problem == Problem::Escape
                                  ? solve_escape(mesh, opts)
                                  : solve_neumann_robin(mesh, g.robin()->alpha, g.robin()->beta, opts);
        for (std::size_t k = 0; k < points.size(); ++k)
            values[k].push_back(f.evaluate(points[k]));
    }
    std::vector<Extrapolation> out;
    for (const auto& v : values)
        out.push_back(richardson(used_h, v));
    return out;
}

Extrapolation refine_and_extrapolate(const SpineGeometry& g, Problem problem, Vec2 p,
                                     std::span<const double> h_list, const MeshOptions& mesh_opts,
                                     const SolveOptions& opts) {
    const Vec2 points[1] = {p};
    return refine_and_extrapolate(g, problem, std::span<const Vec2>(points), h_list, mesh_opts, opts).front();
}

} // namespace spine
