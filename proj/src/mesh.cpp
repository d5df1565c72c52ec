#include "conehardy/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace conehardy {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Vec3 = std::array<double, 3>;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 normalized(const Vec3& a) {
    double n = norm(a);
    if (n < 1e-14) throw std::invalid_argument("degenerate direction");
    return {a[0] / n, a[1] / n, a[2] / n};
}
Vec3 axpy(double s, const Vec3& a, double t, const Vec3& b) {
    return {s * a[0] + t * b[0], s * a[1] + t * b[1], s * a[2] + t * b[2]};
}

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * norm(cross(sub(b, a), sub(c, a)));
}

double angle_between(const Vec3& a, const Vec3& b) {
    return 2.0 * std::asin(0.5 * std::min(2.0, norm(sub(a, b))));
}

/// Polar frame about the polygon center.
struct Frame {
    Vec3 c, e1, e2;

    double azimuth(const Vec3& p) const { return std::atan2(dot(p, e2), dot(p, e1)); }
    double radius(const Vec3& p) const { return angle_between(c, p); }
    Vec3 point(double phi, double rho) const {
        Vec3 d = axpy(std::cos(phi), e1, std::sin(phi), e2);
        return axpy(std::cos(rho), c, std::sin(rho), d);
    }
};

/// Point at arc parameter t in [0, 1] on the geodesic a -> b.
Vec3 slerp(const Vec3& a, const Vec3& b, double t) {
    double ang = angle_between(a, b);
    double s = std::sin(ang);
    if (s < 1e-14) return a;
    return normalized(axpy(std::sin((1.0 - t) * ang) / s, a, std::sin(t * ang) / s, b));
}

/// Geodesic distance from the center to the polygon boundary in azimuth
/// direction phi (the polygon is star-shaped about the center).
double boundary_radius(const SphericalPolygon& poly, const Frame& fr, double phi) {
    Vec3 d = axpy(std::cos(phi), fr.e1, std::sin(phi), fr.e2);
    Vec3 nphi = cross(fr.c, d); // normal of the azimuth great circle
    const std::size_t m = poly.vertices.size();
    double best = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
        const Vec3& a = poly.vertices[i];
        const Vec3& b = poly.vertices[(i + 1) % m];
        double A = angle_between(a, b);
        if (A < 1e-14) continue;
        double al = dot(a, nphi), be = dot(b, nphi);
        // solve al*sin(A - s) + be*sin(s) = 0 for s in [0, A]
        double s = std::atan2(al * std::sin(A), al * std::cos(A) - be);
        if (s < -1e-12 || s > A + 1e-12) continue;
        Vec3 q = slerp(a, b, std::clamp(s / A, 0.0, 1.0));
        if (dot(q, d) <= 0.0) continue; // opposite azimuth branch
        double rho = fr.radius(q);
        if (best < 0.0 || rho < best) best = rho;
    }
    if (best <= 0.0)
        throw std::invalid_argument("polygon is not star-shaped about its center");
    return best;
}

} // namespace

SphereMesh SphereMesh::disk_mesh(const SphericalPolygon& poly, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("mesh size must be positive");
    const std::size_t m = poly.vertices.size();

    Frame fr;
    Vec3 va = {0, 0, 0};
    for (std::size_t i = 0; i < m; ++i) {
        Vec3 c = cross(poly.vertices[i], poly.vertices[(i + 1) % m]);
        va = {va[0] + c[0], va[1] + c[1], va[2] + c[2]};
    }
    fr.c = normalized(va); // vector-area direction: interior for star-shaped polygons
    Vec3 t1 = sub(poly.vertices[0], axpy(dot(poly.vertices[0], fr.c), fr.c, 0.0, fr.c));
    if (norm(t1) < 1e-8)
        t1 = sub(poly.vertices[1], axpy(dot(poly.vertices[1], fr.c), fr.c, 0.0, fr.c));
    fr.e1 = normalized(t1);
    fr.e2 = cross(fr.c, fr.e1);

    // boundary loop: polygon vertices plus per-edge subdivisions at spacing h,
    // all exactly on the arcs; keep (azimuth, rho, point) sorted by azimuth
    struct BPoint {
        double phi, rho;
        Vec3 p;
    };
    std::vector<BPoint> loop;
    double rho_max = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const Vec3& a = poly.vertices[i];
        const Vec3& b = poly.vertices[(i + 1) % m];
        int segs = std::max(1, static_cast<int>(std::ceil(angle_between(a, b) / h)));
        for (int k = 0; k < segs; ++k) {
            Vec3 q = slerp(a, b, static_cast<double>(k) / segs);
            loop.push_back({fr.azimuth(q), fr.radius(q), q});
            rho_max = std::max(rho_max, loop.back().rho);
        }
    }
    std::sort(loop.begin(), loop.end(), [](const BPoint& x, const BPoint& y) { return x.phi < y.phi; });
    for (std::size_t i = 1; i < loop.size(); ++i)
        if (loop[i].phi - loop[i - 1].phi < 1e-12)
            throw std::invalid_argument("polygon boundary azimuths collide; not star-shaped");
    if (rho_max > 0.45 * kTwoPi)
        throw std::invalid_argument("polygon too large for the polar mesh");

    const int R = std::max(2, static_cast<int>(std::ceil(rho_max / h)));
    const std::size_t mR = loop.size();

    SphereMesh mesh;
    mesh.verts.push_back(fr.c);
    mesh.on_boundary.push_back(0);

    // ring j at radius fraction j/R along each azimuth fiber; counts grow
    // linearly with the ring index so element aspect stays near one
    std::vector<std::vector<int>> ring_idx(static_cast<std::size_t>(R) + 1);
    std::vector<std::vector<double>> ring_phi(static_cast<std::size_t>(R) + 1);
    ring_idx[0] = {0};
    ring_phi[0] = {0.0};
    for (int j = 1; j <= R; ++j) {
        double f = static_cast<double>(j) / R;
        if (j == R) {
            for (const auto& bp : loop) {
                ring_idx[static_cast<std::size_t>(j)].push_back(
                    static_cast<int>(mesh.verts.size()));
                ring_phi[static_cast<std::size_t>(j)].push_back(bp.phi);
                mesh.verts.push_back(bp.p);
                mesh.on_boundary.push_back(1);
            }
        } else {
            int mj = std::max<std::size_t>(6, (mR * static_cast<std::size_t>(j)) / R);
            for (int k = 0; k < mj; ++k) {
                double phi = -std::numbers::pi + kTwoPi * k / mj;
                double rho = f * boundary_radius(poly, fr, phi);
                ring_idx[static_cast<std::size_t>(j)].push_back(
                    static_cast<int>(mesh.verts.size()));
                ring_phi[static_cast<std::size_t>(j)].push_back(phi);
                mesh.verts.push_back(fr.point(phi, rho));
                mesh.on_boundary.push_back(0);
            }
        }
    }

    // stitch consecutive rings with the two-pointer sweep over azimuths
    for (int j = 0; j < R; ++j) {
        const auto& in = ring_idx[static_cast<std::size_t>(j)];
        const auto& ip = ring_phi[static_cast<std::size_t>(j)];
        const auto& on = ring_idx[static_cast<std::size_t>(j) + 1];
        const auto& op = ring_phi[static_cast<std::size_t>(j) + 1];
        if (in.size() == 1) {
            for (std::size_t k = 0; k < on.size(); ++k)
                mesh.tris.push_back({in[0], on[k], on[(k + 1) % on.size()]});
            continue;
        }
        std::size_t a = 0, b = 0;
        std::size_t na = in.size(), nb = on.size();
        auto phi_at = [](const std::vector<double>& v, std::size_t i) {
            return v[i % v.size()] + kTwoPi * static_cast<double>(i / v.size());
        };
        while (a < na || b < nb) {
            double next_a = phi_at(ip, a + 1), next_b = phi_at(op, b + 1);
            bool advance_a = (a < na) && (next_a <= next_b || b >= nb);
            if (advance_a) {
                mesh.tris.push_back({in[a % na], on[b % nb], in[(a + 1) % na]});
                ++a;
            } else {
                mesh.tris.push_back({in[a % na], on[b % nb], on[(b + 1) % nb]});
                ++b;
            }
        }
    }
    return mesh;
}

double SphereMesh::max_edge() const {
    double h = 0.0;
    for (const auto& t : tris) {
        h = std::max(h, norm(sub(verts[t[0]], verts[t[1]])));
        h = std::max(h, norm(sub(verts[t[1]], verts[t[2]])));
        h = std::max(h, norm(sub(verts[t[2]], verts[t[0]])));
    }
    return h;
}

double SphereMesh::min_angle_deg() const {
    double best = 180.0;
    for (const auto& t : tris) {
        for (int k = 0; k < 3; ++k) {
            const Vec3& a = verts[t[k]];
            const Vec3& b = verts[t[(k + 1) % 3]];
            const Vec3& c = verts[t[(k + 2) % 3]];
            Vec3 u = sub(b, a), v = sub(c, a);
            double ang = std::atan2(norm(cross(u, v)), dot(u, v));
            best = std::min(best, ang * 180.0 / std::numbers::pi);
        }
    }
    return best;
}

double SphereMesh::area() const {
    double a = 0.0;
    for (const auto& t : tris) a += tri_area(verts[t[0]], verts[t[1]], verts[t[2]]);
    return a;
}

double SphereMesh::interpolate(const std::vector<double>& vertex_values,
                               const std::array<double, 3>& p) const {
    if (vertex_values.size() != verts.size())
        throw std::invalid_argument("vertex value count mismatch");
    // locate the triangle whose barycentric coordinates for the radially
    // projected p are all nonnegative; fall back to the best (least negative)
    double best_score = -1e300;
    double best_value = 0.0;
    for (const auto& t : tris) {
        const Vec3 &a = verts[t[0]], &b = verts[t[1]], &c = verts[t[2]];
        Vec3 nrm = cross(sub(b, a), sub(c, a));
        double denom = dot(nrm, p);
        if (std::fabs(denom) < 1e-14) continue;
        double s = dot(nrm, a) / denom; // ray p*s hits the triangle plane
        Vec3 q = {s * p[0], s * p[1], s * p[2]};
        double full = tri_area(a, b, c);
        if (full < 1e-16) continue;
        double wa = tri_area(q, b, c) / full;
        double wb = tri_area(a, q, c) / full;
        double wc = tri_area(a, b, q) / full;
        double overflow = wa + wb + wc - 1.0;
        double score = -overflow;
        if (score > best_score) {
            best_score = score;
            best_value = wa * vertex_values[t[0]] + wb * vertex_values[t[1]] +
                         wc * vertex_values[t[2]];
        }
    }
    if (best_score < -1e-6)
        throw std::invalid_argument("point outside the meshed cross-section");
    return best_value;
}

} // namespace conehardy
