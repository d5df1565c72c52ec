#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "conehardy/geometry.hpp"

namespace conehardy {

/// Geodesic triangulation of a spherical polygon on S^2: flat triangles with
/// vertices on the sphere; boundary vertices lie exactly on the polygon's
/// great-circle arcs.
struct SphereMesh {
    std::vector<std::array<double, 3>> verts;
    std::vector<std::array<int, 3>> tris;
    std::vector<char> on_boundary; // per-vertex flag

    /// Structured polar mesh about the polygon's interior center: rings of
    /// vertices along the geodesic fibers center -> boundary, ring counts
    /// proportional to ring circumference. Requires the polygon to be
    /// star-shaped about its vector-area direction. `h` is the target edge
    /// length.
    static SphereMesh disk_mesh(const SphericalPolygon& poly, double h);

    /// Longest (flat) edge length.
    double max_edge() const;
    /// Smallest triangle angle, degrees.
    double min_angle_deg() const;
    /// Total flat area.
    double area() const;

    /// Barycentric interpolation of vertex values at a direction p
    /// (brute-force triangle location; intended for test-scale queries).
    double interpolate(const std::vector<double>& vertex_values,
                       const std::array<double, 3>& p) const;
};

} // namespace conehardy
