#pragma once

#include "spine/geometry.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

namespace spine {

struct BoundaryEdge {
    int a = 0;
    int b = 0; // a -> b runs counterclockwise (domain on the left)
    BoundaryKind kind = BoundaryKind::Reflecting;
};

/// Edge of the head window: a -> b counterclockwise on the head circle, with
/// the head-side triangle. On a spine these edges are interior (the neck
/// mouth); on a head-only domain they are the Robin boundary.
struct WindowEdge {
    int a = 0;
    int b = 0;
    int triangle = -1;
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles; // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<WindowEdge> window_edges;
    int head_triangles = 0;          // triangles [0, head_triangles) lie in the head
    double h = 0.0;                  // edge length across the window
    double boundary_tolerance = 0.0; // largest chord sagitta of a boundary edge
    bool has_head = false;
    HeadSpec head{};
};

struct MeshOptions {
    double grading = 0.0;     // head size ratio window -> far side is grading^2; 0 picks sqrt(R / (2 eps))
    double neck_growth = 1.15; // along-neck spacing growth away from the mouth
    double neck_aspect = 2.5;  // cap on along/across spacing ratio
    double min_angle_deg = 18.0;
};

/// Block-structured mesh: a disk graded toward the window (a conformal
/// Moebius image of a ring mesh) stitched along the window to a mapped
/// structured grid of the neck. `h` is the edge length across the window and
/// must be below eps / 2.
Mesh generate_mesh(const SpineGeometry& g, double h, const MeshOptions& opts = {});

/// Disk-only mesh with `window_edges` boundary edges at the given ascending
/// head angles around x*, graded by `grading`. Boundary edges are all tagged
/// reflecting; window edges are listed separately.
Mesh generate_disk_mesh(const HeadSpec& head, std::span<const double> window_angles, double grading);

double signed_area(const Mesh& m, int triangle);
double min_angle_deg(const Mesh& m);

struct MeshReport {
    bool positive_areas = true;
    bool conforming = true;       // no edge shared by more than two triangles
    bool boundary_tagged = true;  // boundary edges == edges with one triangle, each tagged once
    bool boundary_closed = true;  // every boundary vertex has one incoming and one outgoing edge
    double min_angle_deg = 0.0;
    bool ok(double floor_deg = 18.0) const {
        return positive_areas && conforming && boundary_tagged && boundary_closed &&
               min_angle_deg >= floor_deg;
    }
};

MeshReport check_mesh(const Mesh& m);

/// Header "vertices triangles boundary_edges", then "x y" lines, "i j k"
/// lines, and "i j tag" lines.
void write_mesh(std::ostream& os, const Mesh& m);

} // namespace spine
