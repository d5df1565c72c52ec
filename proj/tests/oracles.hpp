#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they are used to check.

#include <array>
#include <cmath>
#include <vector>

#include "conehardy/geometry.hpp"

namespace oracles {

/// Distance from unit vector p to the ray through unit vector y, from the
/// plane geometry of the (0, p, y) triangle.
inline double ray_distance_exact(const std::array<double, 3>& p, const std::array<double, 3>& y) {
    double c = p[0] * y[0] + p[1] * y[1] + p[2] * y[2];
    if (c <= 0.0) return 1.0; // obtuse: nearest point on the ray is the vertex
    double s2 = 1.0 - c * c;
    return std::sqrt(s2 < 0.0 ? 0.0 : s2);
}

/// Brute-force delta for a spherical polygon: minimize the exact ray distance
/// over `total` boundary points sampled uniformly in arc length per edge.
inline double polygon_delta_bruteforce(const conehardy::SphericalPolygon& poly,
                                       const std::array<double, 3>& p, int total) {
    const std::size_t m = poly.vertices.size();
    int per_edge = total / static_cast<int>(m);
    double best = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& a = poly.vertices[i];
        const auto& b = poly.vertices[(i + 1) % m];
        double dotab = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        double ang = std::acos(dotab < -1.0 ? -1.0 : (dotab > 1.0 ? 1.0 : dotab));
        double s = std::sin(ang);
        for (int k = 0; k <= per_edge; ++k) {
            double t = static_cast<double>(k) / per_edge;
            double ca = std::sin((1.0 - t) * ang) / s;
            double cb = std::sin(t * ang) / s;
            std::array<double, 3> q = {ca * a[0] + cb * b[0], ca * a[1] + cb * b[1],
                                       ca * a[2] + cb * b[2]};
            double nq = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
            q = {q[0] / nq, q[1] / nq, q[2] / nq};
            best = std::min(best, ray_distance_exact(p, q));
        }
    }
    return best;
}

/// Central-difference Laplacian with the 5-point (fourth-order) stencil per axis.
template <typename F>
double fd_laplacian(const F& f, const std::vector<double>& x, double h) {
    double lap = 0.0;
    std::vector<double> y(x);
    const double f0 = f(x);
    for (std::size_t k = 0; k < x.size(); ++k) {
        y[k] = x[k] + h;
        double fp = f(y);
        y[k] = x[k] - h;
        double fm = f(y);
        y[k] = x[k] + 2.0 * h;
        double fpp = f(y);
        y[k] = x[k] - 2.0 * h;
        double fmm = f(y);
        y[k] = x[k];
        lap += (-fpp + 16.0 * fp - 30.0 * f0 + 16.0 * fm - fmm) / (12.0 * h * h);
    }
    return lap;
}

} // namespace oracles
