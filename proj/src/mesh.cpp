#include "spine/mesh.hpp"

#include "spine/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace spine {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Tri = std::array<int, 3>;

double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

void push_ccw(std::vector<Tri>& tris, const std::vector<Vec2>& v, int a, int b, int c) {
    if (orient(v[a], v[b], v[c]) < 0.0)
        std::swap(b, c);
    tris.push_back({a, b, c});
}

// Connects two concentric rings whose node angles are listed ascending from
// a common reference angle; produces nA + nB triangles.
void stitch_rings(std::vector<Tri>& tris, const std::vector<Vec2>& v, const std::vector<int>& inner,
                  const std::vector<double>& inner_angle, const std::vector<int>& outer,
                  const std::vector<double>& outer_angle) {
    const std::size_t na = inner.size();
    const std::size_t nb = outer.size();
    auto angle_a = [&](std::size_t i) { return i < na ? inner_angle[i] : inner_angle[i - na] + kTwoPi; };
    auto angle_b = [&](std::size_t j) { return j < nb ? outer_angle[j] : outer_angle[j - nb] + kTwoPi; };
    std::size_t i = 0, j = 0;
    while (i < na || j < nb) {
        const bool advance_inner = j == nb || (i < na && angle_a(i + 1) < angle_b(j + 1));
        if (advance_inner) {
            push_ccw(tris, v, inner[i % na], inner[(i + 1) % na], outer[j % nb]);
            ++i;
        } else {
            push_ccw(tris, v, inner[i % na], outer[(j + 1) % nb], outer[j % nb]);
            ++j;
        }
    }
}

// Boundary angle map of the disk automorphism w -> (w + a)/(1 + a w), with
// grading = (1 + a)/(1 - a): tan(theta/2) = tan(psi/2) / grading.
double source_angle(double theta, double grading) {
    return 2.0 * std::atan2(grading * std::sin(0.5 * theta), std::cos(0.5 * theta));
}

double wrap_from(double angle, double ref) {
    double a = std::fmod(angle - ref, kTwoPi);
    if (a < 0.0)
        a += kTwoPi;
    return ref + a;
}

using EdgeKey = std::pair<int, int>;
EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::map<EdgeKey, std::vector<int>> edge_triangles(const Mesh& m) {
    std::map<EdgeKey, std::vector<int>> out;
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
        const Tri& tri = m.triangles[t];
        for (int e = 0; e < 3; ++e)
            out[key(tri[e], tri[(e + 1) % 3])].push_back(t);
    }
    return out;
}

void attach_window_triangles(Mesh& m) {
    const auto adj = edge_triangles(m);
    for (WindowEdge& w : m.window_edges) {
        for (int t : adj.at(key(w.a, w.b))) {
            const Tri& tri = m.triangles[t];
            // The head-side triangle sees the edge a -> b counterclockwise.
            for (int e = 0; e < 3; ++e)
                if (tri[e] == w.a && tri[(e + 1) % 3] == w.b)
                    w.triangle = t;
        }
    }
}

} // namespace

Mesh generate_disk_mesh(const HeadSpec& head, std::span<const double> window_angles, double grading) {
    const int m = static_cast<int>(window_angles.size()) - 1;
    if (m < 1)
        throw Error(Errc::MeshFailure, "window needs at least one edge");
    grading = std::max(grading, 1.0);
    const double a = (grading - 1.0) / (grading + 1.0);

    std::vector<double> psi_window(m + 1);
    for (int j = 0; j <= m; ++j)
        psi_window[j] = source_angle(window_angles[j], grading);
    const double span = psi_window[m] - psi_window[0];
    const double dpsi = span / m;
    const int n_out = std::max(6, static_cast<int>(std::lround((kTwoPi - span) / dpsi)));
    const int rings = std::max(2, static_cast<int>(std::lround(1.0 / dpsi)));

    const double ref = psi_window[0];
    std::vector<double> outer_angle(psi_window.begin(), psi_window.end());
    for (int k = 1; k < n_out; ++k)
        outer_angle.push_back(psi_window[m] + (kTwoPi - span) * k / n_out);
    const int n_boundary = static_cast<int>(outer_angle.size());

    // Source mesh on the unit disk, stored in `src`; mapped afterwards.
    std::vector<Vec2> src;
    std::vector<Tri> tris;
    src.push_back({0.0, 0.0});
    std::vector<int> prev_nodes{0};
    std::vector<double> prev_angle{ref};
    for (int k = 1; k <= rings; ++k) {
        std::vector<int> nodes;
        std::vector<double> angles;
        if (k < rings) {
            const int n = std::max(6, static_cast<int>(std::lround(double(n_boundary) * k / rings)));
            const double offset = (k % 2 == 0 ? 0.0 : 0.5) * kTwoPi / n;
            for (int i = 0; i < n; ++i)
                angles.push_back(wrap_from(ref + offset + kTwoPi * i / n, ref));
            std::sort(angles.begin(), angles.end());
        } else {
            angles = outer_angle;
        }
        const double r = double(k) / rings;
        for (double ang : angles) {
            nodes.push_back(static_cast<int>(src.size()));
            src.push_back(polar(r, ang));
        }
        if (k == 1) {
            const int n = static_cast<int>(nodes.size());
            for (int i = 0; i < n; ++i)
                push_ccw(tris, src, 0, nodes[i], nodes[(i + 1) % n]);
        } else {
            stitch_rings(tris, src, prev_nodes, prev_angle, nodes, angles);
        }
        prev_nodes = std::move(nodes);
        prev_angle = std::move(angles);
    }

    Mesh mesh;
    mesh.has_head = true;
    mesh.head = head;
    mesh.vertices.reserve(src.size());
    for (Vec2 w : src) {
        const std::complex<double> z(w.x, w.y);
        const std::complex<double> img = (z + a) / (1.0 + a * z);
        mesh.vertices.push_back(head.center + head.radius * Vec2{img.real(), img.imag()});
    }
    // Boundary ring: snap exactly onto the circle, window nodes at the
    // requested angles.
    const int first_boundary = static_cast<int>(src.size()) - n_boundary;
    for (int i = 0; i < n_boundary; ++i) {
        double theta;
        if (i <= m) {
            theta = window_angles[i];
        } else {
            const Vec2 q = mesh.vertices[first_boundary + i] - head.center;
            theta = std::atan2(q.y, q.x);
        }
        mesh.vertices[first_boundary + i] = head.center + polar(head.radius, theta);
    }
    mesh.triangles = std::move(tris);
    for (int i = 0; i < n_boundary; ++i) {
        const int p = first_boundary + i;
        const int q = first_boundary + (i + 1) % n_boundary;
        if (i < m)
            mesh.window_edges.push_back({p, q, -1});
        else
            mesh.boundary_edges.push_back({p, q, BoundaryKind::Reflecting});
    }
    double sag = 0.0;
    for (const auto& e : mesh.boundary_edges)
        sag = std::max(sag, norm2(mesh.vertices[e.b] - mesh.vertices[e.a]) / (8.0 * head.radius));
    mesh.boundary_tolerance = sag;
    attach_window_triangles(mesh);
    return mesh;
}

Mesh generate_mesh(const SpineGeometry& g, double h, const MeshOptions& opts) {
    const double eps = g.half_width();
    if (!(h > 0.0) || !(h < eps / 2.0)) {
        std::ostringstream os;
        os << "mesh size " << h << " must be below eps/2 = " << eps / 2.0;
        throw Error(Errc::WindowUnresolved, os.str());
    }
    const int m = std::max(4, static_cast<int>(std::ceil(2.0 * eps / h - 1e-9)));
    std::vector<double> eta(m + 1);
    for (int j = 0; j <= m; ++j)
        eta[j] = -1.0 + 2.0 * j / m;

    Mesh mesh;
    std::vector<int> mouth(m + 1, -1);
    if (g.has_head()) {
        const HeadSpec& head = g.head();
        std::vector<double> angles(m + 1);
        for (int j = 0; j <= m; ++j)
            angles[j] = g.kind() == DomainKind::HeadOnly ? eta[j] * eps / head.radius
                                                         : std::asin(eta[j] * eps / head.radius);
        const double grading =
            opts.grading > 0.0 ? opts.grading : std::sqrt(std::max(1.0, head.radius / (2.0 * eps)));
        mesh = generate_disk_mesh(head, angles, grading);
        mesh.head_triangles = static_cast<int>(mesh.triangles.size());
        for (int j = 0; j <= m; ++j)
            mouth[j] = j < m ? mesh.window_edges[j].a : mesh.window_edges[m - 1].b;
        if (g.kind() == DomainKind::HeadOnly)
            for (const WindowEdge& w : mesh.window_edges)
                mesh.boundary_edges.push_back({w.a, w.b, BoundaryKind::Robin});
    }
    mesh.h = 2.0 * eps / m;

    if (g.has_neck()) {
        const double across = 2.0 * eps / m;
        const double total = g.neck().centerline_length();
        const double cap = opts.neck_aspect * across;
        std::vector<double> s{0.0};
        double step = across;
        while (s.back() + step < total) {
            s.push_back(s.back() + step);
            step = std::min(step * opts.neck_growth, cap);
        }
        // Close with one more step and shrink the grid onto [0, total] so the
        // last interval is not a sliver.
        s.push_back(s.back() + step);
        const double shrink = total / s.back();
        for (double& v : s)
            v *= shrink;
        s.back() = total;
        const int ns = static_cast<int>(s.size()) - 1;

        std::vector<std::vector<int>> node(ns + 1, std::vector<int>(m + 1));
        for (int i = 0; i <= ns; ++i)
            for (int j = 0; j <= m; ++j) {
                if (i == 0 && g.has_head()) {
                    node[i][j] = mouth[j];
                    continue;
                }
                node[i][j] = static_cast<int>(mesh.vertices.size());
                mesh.vertices.push_back(g.neck_point(s[i], eta[j]));
            }
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < m; ++j) {
                const int p00 = node[i][j], p10 = node[i + 1][j];
                const int p01 = node[i][j + 1], p11 = node[i + 1][j + 1];
                // Mirror the diagonals about the axis so the mesh is symmetric.
                if (2 * j < m) {
                    push_ccw(mesh.triangles, mesh.vertices, p00, p10, p11);
                    push_ccw(mesh.triangles, mesh.vertices, p00, p11, p01);
                } else {
                    push_ccw(mesh.triangles, mesh.vertices, p00, p10, p01);
                    push_ccw(mesh.triangles, mesh.vertices, p10, p11, p01);
                }
            }
        for (int i = 0; i < ns; ++i) {
            mesh.boundary_edges.push_back({node[i][0], node[i + 1][0], BoundaryKind::Reflecting});
            mesh.boundary_edges.push_back({node[i + 1][m], node[i][m], BoundaryKind::Reflecting});
        }
        for (int j = 0; j < m; ++j)
            mesh.boundary_edges.push_back({node[ns][j], node[ns][j + 1], BoundaryKind::Absorbing});
        if (!g.has_head())
            for (int j = 0; j < m; ++j)
                mesh.boundary_edges.push_back({node[0][j + 1], node[0][j], BoundaryKind::Reflecting});

        if (g.neck().is_curved()) {
            const auto& c = std::get<CurvedNeck>(g.neck().shape);
            const double rmin = std::min(c.r1, c.r2) - eps;
            for (int i = 0; i < ns; ++i)
                mesh.boundary_tolerance =
                    std::max(mesh.boundary_tolerance,
                             norm2(mesh.vertices[node[i + 1][0]] - mesh.vertices[node[i][0]]) / (8.0 * rmin));
        }
    }
    if (g.has_head())
        attach_window_triangles(mesh);

    const double worst = min_angle_deg(mesh);
    if (worst < opts.min_angle_deg) {
        std::ostringstream os;
        os << "minimum angle " << worst << " deg below the floor " << opts.min_angle_deg;
        throw Error(Errc::MeshFailure, os.str());
    }
    return mesh;
}

double signed_area(const Mesh& m, int t) {
    const Tri& tri = m.triangles[t];
    return 0.5 * orient(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]);
}

double min_angle_deg(const Mesh& m) {
    double worst = 180.0;
    for (const Tri& tri : m.triangles)
        for (int e = 0; e < 3; ++e) {
            const Vec2 p = m.vertices[tri[e]];
            const Vec2 u = m.vertices[tri[(e + 1) % 3]] - p;
            const Vec2 v = m.vertices[tri[(e + 2) % 3]] - p;
            const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v));
            worst = std::min(worst, ang * 180.0 / kPi);
        }
    return worst;
}

MeshReport check_mesh(const Mesh& m) {
    MeshReport r;
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t)
        if (!(signed_area(m, t) > 0.0))
            r.positive_areas = false;
    const auto adj = edge_triangles(m);
    std::map<EdgeKey, int> tagged;
    for (const auto& e : m.boundary_edges)
        ++tagged[key(e.a, e.b)];
    std::size_t single = 0;
    for (const auto& [k, tris] : adj) {
        if (tris.size() > 2)
            r.conforming = false;
        if (tris.size() == 1) {
            ++single;
            const auto it = tagged.find(k);
            if (it == tagged.end() || it->second != 1)
                r.boundary_tagged = false;
        }
    }
    if (single != m.boundary_edges.size())
        r.boundary_tagged = false;
    std::map<int, std::pair<int, int>> degree;
    for (const auto& e : m.boundary_edges) {
        ++degree[e.a].first;
        ++degree[e.b].second;
    }
    for (const auto& [v, d] : degree)
        if (d.first != 1 || d.second != 1)
            r.boundary_closed = false;
    r.min_angle_deg = min_angle_deg(m);
    return r;
}

void write_mesh(std::ostream& os, const Mesh& m) {
    os.precision(17);
    os << m.vertices.size() << ' ' << m.triangles.size() << ' ' << m.boundary_edges.size() << '\n';
    for (Vec2 v : m.vertices)
        os << v.x << ' ' << v.y << '\n';
    for (const Tri& t : m.triangles)
        os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& e : m.boundary_edges)
        os << e.a << ' ' << e.b << ' ' << to_string(e.kind) << '\n';
}

} // namespace spine
