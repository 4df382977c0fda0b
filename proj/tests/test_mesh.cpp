#include "spine/error.hpp"
#include "spine/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace spine;
using std::numbers::pi;

namespace {

double mesh_area(const Mesh& m) {
    double a = 0.0;
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t)
        a += signed_area(m, t);
    return a;
}

} // namespace

TEST_CASE("meshes satisfy the quality contract") {
    const std::vector<SpineGeometry> gs = {
        build_straight_spine(1.0, 0.1, 1.0), build_head_only(1.0, 0.1, 1.0, 0.5),
        build_curved_spine(1.0, 0.1, 1.0, 0.7, 0.9),
        build_curved_spine(1.0, 0.05, 1.0, 1.0, 1.0, pi / 2, pi / 2, ArcRadii::InnerWall),
        build_channel(0.1, 1.0), build_straight_spine(1.0, 0.01, 2.0)};
    for (const SpineGeometry& g : gs) {
        std::vector<double> deficit;
        for (double f : {0.4, 0.2, 0.1}) {
            const Mesh m = generate_mesh(g, f * g.half_width());
            const MeshReport r = check_mesh(m);
            CHECK(r.positive_areas);
            CHECK(r.conforming);
            CHECK(r.boundary_tagged);
            CHECK(r.boundary_closed);
            CHECK(r.min_angle_deg >= 18.0);
            deficit.push_back(area(g) - mesh_area(m));
        }
        // graded boundary edges: the area deficit is second order in h
        CHECK(deficit[2] >= -1e-12);
        CHECK(deficit[2] < 1e-3 * area(g));
        if (deficit[0] > 1e-12) {
            CHECK(deficit[0] / deficit[1] > 3.5);
            CHECK(deficit[1] / deficit[2] > 3.5);
        }
    }
}

TEST_CASE("straight spine at h = 0.02") {
    const Mesh m = generate_mesh(build_straight_spine(1.0, 0.1, 1.0), 0.02);
    MESSAGE("vertices " << m.vertices.size() << ", triangles " << m.triangles.size() << ", min angle "
                        << min_angle_deg(m));
    CHECK(m.vertices.size() > 1000);
    CHECK(m.vertices.size() < 100000);
    CHECK(m.head_triangles > 0);
    CHECK(m.head_triangles < static_cast<int>(m.triangles.size()));
    int absorbing = 0;
    for (const BoundaryEdge& e : m.boundary_edges)
        absorbing += e.kind == BoundaryKind::Absorbing;
    CHECK(absorbing >= 10);
}

TEST_CASE("head-only Robin window edges sum to 2 eps") {
    const double h = 0.02;
    const Mesh m = generate_mesh(build_head_only(1.0, 0.1, 1.0, 0.5), h);
    double len = 0.0;
    for (const BoundaryEdge& e : m.boundary_edges)
        if (e.kind == BoundaryKind::Robin)
            len += distance(m.vertices[e.a], m.vertices[e.b]);
    CHECK(std::abs(len - 0.2) <= h * h);
    CHECK(m.window_edges.size() >= 4);
}

TEST_CASE("window must be resolved") {
    try {
        generate_mesh(build_straight_spine(1.0, 0.1, 1.0), 0.06);
        FAIL("expected WindowUnresolved");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::WindowUnresolved);
    }
}

TEST_CASE("mesh export header") {
    const Mesh m = generate_mesh(build_channel(0.1, 0.5), 0.04);
    std::ostringstream os;
    write_mesh(os, m);
    std::istringstream is(os.str());
    std::size_t nv = 0, nt = 0, nb = 0;
    is >> nv >> nt >> nb;
    CHECK(nv == m.vertices.size());
    CHECK(nt == m.triangles.size());
    CHECK(nb == m.boundary_edges.size());
    std::size_t lines = 0;
    for (std::string line; std::getline(is, line);)
        lines += !line.empty();
    CHECK(lines == nv + nt + nb);
}
