#include "conehardy/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace conehardy {

namespace {

constexpr double kPi = std::numbers::pi;

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

std::array<double, 3> cross3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm3(const std::array<double, 3>& a) { return std::sqrt(dot3(a, a)); }

/// Angle between unit vectors, stable near 0 and pi.
double angle_between(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return 2.0 * std::asin(0.5 * norm3({a[0] - b[0], a[1] - b[1], a[2] - b[2]}));
}

/// Distance from a unit vector at angular offset t to the ray it subtends:
/// sin t up to the right angle, then the vertex (distance 1) is nearest.
double ray_distance(double t) { return t <= kPi / 2.0 ? std::sin(t) : 1.0; }

/// Circle distance between angles, in [0, pi].
double circle_distance(double a, double b) {
    double d = std::fmod(std::fabs(a - b), 2.0 * kPi);
    return d > kPi ? 2.0 * kPi - d : d;
}

/// Winding-number test for a spherical polygon, on the tangent-plane projection
/// at p. Adequate for the star-shaped polygons this module supports.
bool polygon_contains(const SphericalPolygon& poly, const std::array<double, 3>& p, double tol) {
    // p is inside iff it is on the interior side of every edge plane for a
    // convex polygon; for general star-shaped polygons use the signed sum of
    // edge-subtended angles around p (spherical winding).
    double winding = 0.0;
    const std::size_t m = poly.vertices.size();
    for (std::size_t i = 0; i < m; ++i) {
        const auto& a = poly.vertices[i];
        const auto& b = poly.vertices[(i + 1) % m];
        // project a, b to the tangent plane at p
        double da = dot3(a, p), db = dot3(b, p);
        std::array<double, 3> ta = {a[0] - da * p[0], a[1] - da * p[1], a[2] - da * p[2]};
        std::array<double, 3> tb = {b[0] - db * p[0], b[1] - db * p[1], b[2] - db * p[2]};
        double na = norm3(ta), nb = norm3(tb);
        if (na < 1e-14 || nb < 1e-14) return true; // p coincides with a vertex
        double x = dot3(ta, tb) / (na * nb);
        double y = dot3(cross3(ta, tb), p) / (na * nb);
        winding += std::atan2(y, x);
    }
    (void)tol;
    return std::fabs(winding) > kPi; // ~2*pi inside, ~0 outside
}

struct PolygonBoundary {
    std::vector<std::array<double, 3>> points;
};

/// Uniformly spaced samples along each great-circle edge.
PolygonBoundary sample_polygon_boundary(const SphericalPolygon& poly, int per_edge) {
    PolygonBoundary pb;
    const std::size_t m = poly.vertices.size();
    pb.points.reserve(m * static_cast<std::size_t>(per_edge));
    for (std::size_t i = 0; i < m; ++i) {
        const auto& a = poly.vertices[i];
        const auto& b = poly.vertices[(i + 1) % m];
        double ang = angle_between(a, b);
        double s = std::sin(ang);
        for (int k = 0; k < per_edge; ++k) {
            double t = static_cast<double>(k) / per_edge;
            std::array<double, 3> q;
            if (s < 1e-12) {
                q = a;
            } else {
                double ca = std::sin((1.0 - t) * ang) / s;
                double cb = std::sin(t * ang) / s;
                q = {ca * a[0] + cb * b[0], ca * a[1] + cb * b[1], ca * a[2] + cb * b[2]};
            }
            double nq = norm3(q);
            pb.points.push_back({q[0] / nq, q[1] / nq, q[2] / nq});
        }
    }
    return pb;
}

double polygon_min_angle_to_boundary(const SphericalPolygon& poly, const std::array<double, 3>& p) {
    thread_local const SphericalPolygon* cached_poly = nullptr;
    thread_local PolygonBoundary cached;
    if (cached_poly != &poly) {
        cached = sample_polygon_boundary(poly, ConeSpec::kPolygonBoundarySamples);
        cached_poly = &poly;
    }
    double best = kPi;
    for (const auto& q : cached.points) best = std::min(best, angle_between(p, q));
    return best;
}

} // namespace

ConeSpec::ConeSpec(int n, CrossSection cross_section) : n_(n), cs_(std::move(cross_section)) {
    if (is_sector()) {
        if (n_ != 2) throw std::invalid_argument("sector cross-section requires n = 2");
        double a = sector().alpha;
        if (!(a > 0.0 && a < 2.0 * kPi))
            throw std::invalid_argument("sector opening must satisfy 0 < alpha < 2*pi");
    } else if (is_cap()) {
        if (n_ < 3) throw std::invalid_argument("cap cross-section requires n >= 3");
        double a = cap().alpha;
        if (!(a > 0.0 && a < kPi))
            throw std::invalid_argument("cap half-angle must satisfy 0 < alpha < pi");
    } else {
        if (n_ != 3) throw std::invalid_argument("spherical polygon requires n = 3");
        const auto& vs = polygon().vertices;
        if (vs.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
        for (const auto& v : vs) {
            if (std::fabs(norm3(v) - 1.0) > 1e-10)
                throw std::invalid_argument("polygon vertices must be unit vectors");
        }
        for (std::size_t i = 0; i < vs.size(); ++i) {
            for (std::size_t j = i + 1; j < vs.size(); ++j) {
                if (angle_between(vs[i], vs[j]) < 1e-9)
                    throw std::invalid_argument("polygon vertices must be pairwise distinct");
            }
        }
    }
}

std::string ConeSpec::describe() const {
    std::ostringstream os;
    if (is_sector()) {
        os << "sector(alpha=" << sector().alpha << ",n=2)";
    } else if (is_cap()) {
        os << "cap(alpha=" << cap().alpha << ",n=" << n_ << ")";
    } else {
        os << "polygon(vertices=" << polygon().vertices.size() << ",n=3)";
    }
    return os.str();
}

PointOnSphere::PointOnSphere(std::vector<double> coords) : x(std::move(coords)) {
    if (x.size() < 2) throw std::invalid_argument("point needs dimension >= 2");
    if (std::fabs(norm(x) - 1.0) > 1e-12)
        throw std::invalid_argument("point is not on the unit sphere");
}

PointOnSphere PointOnSphere::from_angle(double theta) {
    return PointOnSphere({std::cos(theta), std::sin(theta)});
}

PointOnSphere PointOnSphere::from_polar(int n, double t) {
    std::vector<double> c(static_cast<std::size_t>(n), 0.0);
    c[0] = std::cos(t);
    c[1] = std::sin(t);
    return PointOnSphere(std::move(c));
}

double PointOnSphere::angle() const {
    double a = std::atan2(x[1], x[0]);
    return a < 0.0 ? a + 2.0 * kPi : a;
}

double PointOnSphere::polar() const { return std::acos(std::clamp(x[0], -1.0, 1.0)); }

TruncatedRegion::TruncatedRegion(double rmin, double rmax, RegionKind k)
    : r_min(rmin), r_max(rmax), kind(k) {
    if (!(rmin > 0.0) || !(rmax > rmin) || !std::isfinite(rmax))
        throw std::invalid_argument("truncated region needs 0 < r_min < r_max < inf");
}

double geodesic_boundary_distance(const ConeSpec& spec, const PointOnSphere& p) {
    if (spec.is_sector()) {
        double a = spec.sector().alpha;
        double th = p.angle();
        if (th > a + 1e-12 && th < 2.0 * kPi - 1e-12)
            throw std::invalid_argument("point lies outside the sector closure");
        if (th >= 2.0 * kPi - 1e-12) th = 0.0;
        return std::min(circle_distance(th, 0.0), circle_distance(th, a));
    }
    if (spec.is_cap()) {
        if (p.dim() != spec.dim()) throw std::invalid_argument("point dimension mismatch");
        double t = p.polar();
        double a = spec.cap().alpha;
        if (t > a + 1e-12) throw std::invalid_argument("point lies outside the cap closure");
        return std::min(a - t, kPi);
    }
    const auto& poly = spec.polygon();
    if (p.dim() != 3) throw std::invalid_argument("polygon points live on S^2");
    std::array<double, 3> q = {p.x[0], p.x[1], p.x[2]};
    double d = polygon_min_angle_to_boundary(poly, q);
    if (d > 1e-9 && !polygon_contains(poly, q, 1e-12))
        throw std::invalid_argument("point lies outside the polygon closure");
    return d;
}

double boundary_distance_delta(const ConeSpec& spec, const PointOnSphere& p) {
    return ray_distance(geodesic_boundary_distance(spec, p));
}

double delta_at(const ConeSpec& spec, const std::vector<double>& x) {
    double r = norm(x);
    if (r == 0.0) return 0.0;
    std::vector<double> w(x);
    for (double& c : w) c /= r;
    return r * boundary_distance_delta(spec, PointOnSphere(std::move(w)));
}

bool contains_direction(const ConeSpec& spec, const std::vector<double>& x, double tol) {
    double r = norm(x);
    if (r == 0.0) return false;
    std::vector<double> w(x);
    for (double& c : w) c /= r;
    PointOnSphere p(std::move(w));
    try {
        return geodesic_boundary_distance(spec, p) > tol;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

EulerCheckResult euler_identity_check(const ConeSpec& spec,
                                      const std::vector<std::vector<double>>& samples,
                                      double fd_step) {
    if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be positive");
    EulerCheckResult res;
    for (const auto& x : samples) {
        if (static_cast<int>(x.size()) != spec.dim())
            throw std::invalid_argument("sample dimension mismatch");
        if (!contains_direction(spec, x, 0.0))
            throw std::invalid_argument("sample lies outside the cone");
        const double d0 = delta_at(spec, x);
        bool ridge = false;
        double xdotgrad = 0.0;
        std::vector<double> y(x);
        for (std::size_t k = 0; k < x.size(); ++k) {
            y[k] = x[k] + fd_step;
            double dp = delta_at(spec, y);
            y[k] = x[k] - fd_step;
            double dm = delta_at(spec, y);
            y[k] = x[k];
            double fwd = (dp - d0) / fd_step;
            double bwd = (d0 - dm) / fd_step;
            // one-sided slope disagreement beyond FD noise marks the ridge set
            double scale = std::max({std::fabs(fwd), std::fabs(bwd), 1e-8});
            if (std::fabs(fwd - bwd) / scale > 1e-3) ridge = true;
            xdotgrad += x[k] * (dp - dm) / (2.0 * fd_step);
        }
        if (ridge) {
            ++res.rejected_samples;
            continue;
        }
        res.max_residual = std::max(res.max_residual, std::fabs(xdotgrad - d0));
    }
    return res;
}

double sphere_surface_measure(int m) {
    // |S^m| = 2 pi^{(m+1)/2} / Gamma((m+1)/2)
    return 2.0 * std::pow(kPi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

namespace {

/// Integral of sin^{p}(t) over [a, b] by 8-point Gauss-Legendre (exact to
/// machine precision at the cell sizes used here).
double sin_power_integral(double a, double b, int p) {
    static const double xs[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double ws[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += ws[i] * std::pow(std::sin(mid + half * xs[i]), p);
    return s * half;
}

} // namespace

double cross_section_area(const ConeSpec& spec) {
    if (spec.is_sector()) return spec.sector().alpha;
    if (spec.is_cap()) {
        int n = spec.dim();
        double a = spec.cap().alpha;
        double s = 0.0;
        const int cells = 64;
        for (int i = 0; i < cells; ++i)
            s += sin_power_integral(a * i / cells, a * (i + 1) / cells, n - 2);
        return sphere_surface_measure(n - 2) * s;
    }
    throw std::invalid_argument("cross_section_area: polygon area comes from its mesh");
}

RegionGrid sample_region_grid(const ConeSpec& spec, const TruncatedRegion& region,
                              int radial_nodes, int angular_nodes) {
    if (radial_nodes < 4 || angular_nodes < 4)
        throw std::invalid_argument("sample_region_grid needs at least 4 nodes per direction");
    const int n = spec.dim();
    RegionGrid g;

    // log-spaced radial nodes; each cell [r_i, r_{i+1}] contributes its exact
    // mass (r_{i+1}^n - r_i^n)/n, split evenly between its endpoints, so the
    // weight total telescopes to the exact radial integral at any resolution.
    g.r.resize(static_cast<std::size_t>(radial_nodes));
    g.wr.assign(g.r.size(), 0.0);
    const double lmin = std::log(region.r_min), lmax = std::log(region.r_max);
    for (int i = 0; i < radial_nodes; ++i)
        g.r[static_cast<std::size_t>(i)] =
            std::exp(lmin + (lmax - lmin) * i / (radial_nodes - 1));
    for (int i = 0; i + 1 < radial_nodes; ++i) {
        double mass = (std::pow(g.r[i + 1], n) - std::pow(g.r[i], n)) / n;
        g.wr[i] += 0.5 * mass;
        g.wr[i + 1] += 0.5 * mass;
    }

    // angular nodes with exact cell masses of the cross-section measure
    if (spec.is_sector()) {
        double a = spec.sector().alpha;
        g.ang.resize(static_cast<std::size_t>(angular_nodes));
        g.wang.assign(g.ang.size(), 0.0);
        for (int i = 0; i < angular_nodes; ++i)
            g.ang[static_cast<std::size_t>(i)] = a * i / (angular_nodes - 1);
        for (int i = 0; i + 1 < angular_nodes; ++i) {
            double mass = g.ang[i + 1] - g.ang[i];
            g.wang[i] += 0.5 * mass;
            g.wang[i + 1] += 0.5 * mass;
        }
    } else if (spec.is_cap()) {
        double a = spec.cap().alpha;
        double surf = sphere_surface_measure(n - 2);
        g.ang.resize(static_cast<std::size_t>(angular_nodes));
        g.wang.assign(g.ang.size(), 0.0);
        for (int i = 0; i < angular_nodes; ++i)
            g.ang[static_cast<std::size_t>(i)] = a * i / (angular_nodes - 1);
        for (int i = 0; i + 1 < angular_nodes; ++i) {
            double mass = surf * sin_power_integral(g.ang[i], g.ang[i + 1], n - 2);
            g.wang[i] += 0.5 * mass;
            g.wang[i + 1] += 0.5 * mass;
        }
    } else {
        throw std::invalid_argument("sample_region_grid: polygon regions use the FEM mesh");
    }

    g.delta_ang.resize(g.ang.size());
    for (std::size_t i = 0; i < g.ang.size(); ++i) {
        PointOnSphere p = spec.is_sector() ? PointOnSphere::from_angle(g.ang[i])
                                           : PointOnSphere::from_polar(n, g.ang[i]);
        g.delta_ang[i] = boundary_distance_delta(spec, p);
    }

    double wr_total = 0.0, wa_total = 0.0;
    for (double w : g.wr) wr_total += w;
    for (double w : g.wang) wa_total += w;
    g.total_weight = wr_total * wa_total;
    return g;
}

} // namespace conehardy
