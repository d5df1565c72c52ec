#include "conehardy/spectral.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace conehardy {

namespace {

constexpr double kPi = std::numbers::pi;

double gauss8(double a, double b, const auto& f) {
    static const double xs[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double ws[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += ws[i] * f(mid + half * xs[i]);
    return s * half;
}

/// Power-law graded partition of [lo, hi] into N cells; exponent g >= 1
/// concentrates nodes toward the flagged ends.
std::vector<double> graded_points(double lo, double hi, int N, double g, bool grade_lo,
                                  bool grade_hi) {
    std::vector<double> t(static_cast<std::size_t>(N) + 1);
    for (int j = 0; j <= N; ++j) {
        double xi = static_cast<double>(j) / N;
        double u;
        if (grade_lo && grade_hi) {
            u = xi <= 0.5 ? 0.5 * std::pow(2.0 * xi, g) : 1.0 - 0.5 * std::pow(2.0 * (1.0 - xi), g);
        } else if (grade_hi) {
            u = 1.0 - std::pow(1.0 - xi, g);
        } else if (grade_lo) {
            u = std::pow(xi, g);
        } else {
            u = xi;
        }
        t[static_cast<std::size_t>(j)] = lo + (hi - lo) * u;
    }
    t.front() = lo;
    t.back() = hi;
    return t;
}

struct Weight1D {
    int sin_power = 0; // w(t) = sin(t)^p
    double operator()(double t) const { return sin_power == 0 ? 1.0 : std::pow(std::sin(t), sin_power); }
};

/// Assembles the 1-D operator on the full-node partition `tn` with the given
/// measure weight; `dirichlet_lo/hi` eliminate the end nodes.
DiscreteOperator assemble_1d(const ConeSpec& spec, double mu, const std::vector<double>& tn,
                             Weight1D w, bool dirichlet_lo, bool dirichlet_hi,
                             DiscreteOperator::Kind kind) {
    const int N = static_cast<int>(tn.size()) - 1;
    const int first = dirichlet_lo ? 1 : 0;
    const int last = dirichlet_hi ? N - 1 : N;
    const int m = last - first + 1;
    if (m < 3) throw std::invalid_argument("too few retained nodes");

    DiscreteOperator op;
    op.kind = kind;
    op.n = spec.dim();
    op.mu = mu;
    op.interval_lo = tn.front();
    op.interval_hi = tn.back();
    op.nodes.resize(static_cast<std::size_t>(m));
    op.delta.resize(op.nodes.size());
    op.mass.assign(op.nodes.size(), 0.0);
    op.pot.resize(op.nodes.size());
    op.stiffness.d.assign(op.nodes.size(), 0.0);
    op.stiffness.e.assign(op.nodes.size() - 1, 0.0);

    for (int i = first; i <= last; ++i) op.nodes[static_cast<std::size_t>(i - first)] = tn[i];

    // stiffness: midpoint flux per cell
    for (int i = 0; i < N; ++i) {
        double h = tn[i + 1] - tn[i];
        double coef = w(0.5 * (tn[i] + tn[i + 1])) / h;
        int a = i - first, b = i + 1 - first;
        bool a_in = (i >= first && i <= last), b_in = (i + 1 >= first && i + 1 <= last);
        if (a_in) op.stiffness.d[static_cast<std::size_t>(a)] += coef;
        if (b_in) op.stiffness.d[static_cast<std::size_t>(b)] += coef;
        if (a_in && b_in) op.stiffness.e[static_cast<std::size_t>(a)] -= coef;
    }

    // lumped mass: exact dual-cell integrals of the weight
    for (int i = first; i <= last; ++i) {
        double a = (i == 0) ? tn[0] : 0.5 * (tn[i - 1] + tn[i]);
        double b = (i == N) ? tn[N] : 0.5 * (tn[i] + tn[i + 1]);
        op.mass[static_cast<std::size_t>(i - first)] = gauss8(a, b, [&](double t) { return w(t); });
    }

    for (std::size_t i = 0; i < op.nodes.size(); ++i) {
        PointOnSphere p = spec.is_sector() ? PointOnSphere::from_angle(op.nodes[i])
                                           : PointOnSphere::from_polar(spec.dim(), op.nodes[i]);
        op.delta[i] = boundary_distance_delta(spec, p);
        if (!(op.delta[i] > 0.0))
            throw std::runtime_error("retained node with zero boundary distance");
        op.pot[i] = op.mass[i] / (op.delta[i] * op.delta[i]);
        if (!std::isfinite(op.pot[i]))
            throw std::runtime_error("potential overflow: node spacing underflows");
    }
    return op;
}

/// B^{-1/2} A B^{-1/2} for tridiagonal A (given by diag/off) and diagonal B.
SymTridiag symmetrize(const std::vector<double>& diagA, const std::vector<double>& offA,
                      const std::vector<double>& B) {
    SymTridiag T;
    T.d.resize(diagA.size());
    T.e.resize(offA.size());
    for (std::size_t i = 0; i < diagA.size(); ++i) T.d[i] = diagA[i] / B[i];
    for (std::size_t i = 0; i < offA.size(); ++i) T.e[i] = offA[i] / std::sqrt(B[i] * B[i + 1]);
    return T;
}

double tridiag_scale(const SymTridiag& T) {
    double s = 0.0;
    for (std::size_t i = 0; i < T.size(); ++i) {
        double r = std::fabs(T.d[i]);
        if (i > 0) r += std::fabs(T.e[i - 1]);
        if (i + 1 < T.size()) r += std::fabs(T.e[i]);
        s = std::max(s, r);
    }
    return s;
}

struct Extrapolation {
    double value = 0.0;
    bool extrapolated = false;
    double order = 0.0;
    bool monotone = true;
};

/// Max-normalizes phi and verifies Perron positivity. Components at rounding
/// scale (|phi| <= 1e-12 after normalization) carry no sign information and
/// are folded to tiny positive values; any larger negative lobe means the
/// pair is not the principal one.
void normalize_positive(std::vector<double>& phi) {
    double mx = 0.0;
    for (double v : phi) mx = std::max(mx, std::fabs(v));
    if (!(mx > 0.0)) throw std::runtime_error("zero eigenvector");
    for (double& v : phi) {
        v /= mx;
        if (v < -1e-12) throw std::runtime_error("principal eigenvector has a sign change");
        if (v <= 0.0) v = std::max(std::fabs(v), 1e-300);
    }
}

Extrapolation richardson(const std::vector<double>& s, double default_order = 2.0) {
    Extrapolation ex;
    ex.value = s.back();
    if (s.size() < 2) return ex;
    double scale = 0.0;
    for (double v : s) scale = std::max(scale, std::fabs(v));
    const double noise = 1e-13 * std::max(1.0, scale);
    int dir = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        double d = s[i] - s[i - 1];
        if (std::fabs(d) <= noise) continue;
        int sd = d > 0 ? 1 : -1;
        if (dir == 0)
            dir = sd;
        else if (sd != dir)
            ex.monotone = false;
    }
    if (!ex.monotone) return ex;

    double p = default_order;
    if (s.size() >= 3) {
        double d1 = s[s.size() - 2] - s[s.size() - 3];
        double d2 = s[s.size() - 1] - s[s.size() - 2];
        if (std::fabs(d2) <= noise) { // already converged
            ex.extrapolated = true;
            ex.order = 0.0;
            return ex;
        }
        double r = d1 / d2;
        if (!(r > 1.05)) return ex; // not contracting; leave finest value
        p = std::log2(r);
        if (p < 0.05 || p > 6.0) return ex;
    }
    double d_last = s[s.size() - 1] - s[s.size() - 2];
    ex.value = s.back() + d_last / (std::pow(2.0, p) - 1.0);
    ex.extrapolated = true;
    ex.order = p;
    return ex;
}

// ---- boundary-layer (stretched-coordinate) scheme ------------------------
//
// With u = delta^{1/2} v and dx = dt/delta the quadratic forms become
//   q(u)            = int [ v'^2 + (d'(t)^2/4 - mu) v^2 ] w dx
//                     + int d'(t) w v v' dx            (assembled per element)
//   int u^2     w dt = int delta^2 w v^2 dx
//   int u^2/d^2 w dt = int        w v^2 dx
// with every coefficient bounded: the inverse-square singularity is gone.
// delta, d'(t) and the map t(x) are piecewise elementary for sectors/caps.

struct LogCoord {
    bool sector = true;
    int n = 2;
    double alpha = 0.0;
    double plateau = 0.0; // half-width (sector) / axis extent (cap) with delta = 1
    double c_angle = 0.0; // angular extent of the sin branch

    static LogCoord make(const ConeSpec& spec) {
        LogCoord lc;
        lc.n = spec.dim();
        if (spec.is_sector()) {
            lc.sector = true;
            lc.alpha = spec.sector().alpha;
            lc.plateau = std::max(0.0, 0.5 * lc.alpha - 0.5 * kPi);
            lc.c_angle = std::min(0.5 * lc.alpha, 0.5 * kPi);
        } else if (spec.is_cap()) {
            lc.sector = false;
            lc.alpha = spec.cap().alpha;
            lc.plateau = std::max(0.0, lc.alpha - 0.5 * kPi);
            lc.c_angle = std::min(lc.alpha, 0.5 * kPi);
        } else {
            throw std::invalid_argument("stretched-coordinate scheme needs sector/cap");
        }
        return lc;
    }

    // sector: x = 0 at the mid-angle, Dirichlet at +-X (both ends singular)
    // cap:    x = 0 at the axis (natural end), Dirichlet at X
    struct Local {
        double t;       // angular coordinate
        double delta;   // boundary distance function
        double ddelta;  // d(delta)/dt
        double weight;  // cross-section measure density
    };

    Local eval(double x) const {
        Local L;
        double ax = sector ? std::fabs(x) : x;
        if (ax <= plateau) {
            L.t = sector ? 0.5 * alpha + x : x;
            L.delta = 1.0;
            L.ddelta = 0.0;
        } else {
            // sin branch: remaining angle to the near boundary from
            // d = 2*atan(tan(c/2) e^{-(ax - plateau)})
            double xi = std::tan(0.5 * c_angle) * std::exp(-(ax - plateau));
            double denom = 1.0 + xi * xi;
            double d = 2.0 * std::atan(xi);
            L.delta = 2.0 * xi / denom;      // sin(d)
            double cosd = (1.0 - xi * xi) / denom;
            if (sector) {
                L.t = (x > 0.0) ? alpha - d : d;
                L.ddelta = (x > 0.0) ? -cosd : cosd; // d/dtheta of sin(dist)
            } else {
                L.t = alpha - d;
                L.ddelta = -cosd;
            }
        }
        L.weight = sector ? 1.0 : std::pow(std::sin(L.t), n - 2);
        return L;
    }
};

struct LogOperator {
    SymTridiag A_base;         // stiffness + cross terms + (d'^2/4) w lumped
    std::vector<double> Pdiag; // int w v^2 lumps (the 1/delta^2 weight)
    std::vector<double> Mdiag; // int delta^2 w v^2 lumps
    std::vector<double> theta; // angular positions of retained nodes
    std::vector<double> delta; // boundary distance at retained nodes
    double span = 0.0;
};

LogOperator assemble_log(const ConeSpec& spec, double X, double dx) {
    LogCoord lc = LogCoord::make(spec);
    double x_lo = lc.sector ? -X : 0.0;
    int N = std::max(64, static_cast<int>(std::ceil((X - x_lo) / dx)));
    if (lc.sector && N % 2 != 0) ++N; // keep the mid-angle kink on a node
    double h = (X - x_lo) / N;

    // retained nodes: sector 1..N-1 (Dirichlet both ends), cap 0..N-1
    int first = lc.sector ? 1 : 0;
    int last = N - 1;
    int m = last - first + 1;

    LogOperator op;
    op.span = X;
    op.A_base.d.assign(static_cast<std::size_t>(m), 0.0);
    op.A_base.e.assign(static_cast<std::size_t>(m) - 1, 0.0);
    op.Pdiag.assign(static_cast<std::size_t>(m), 0.0);
    op.Mdiag.assign(static_cast<std::size_t>(m), 0.0);
    op.theta.resize(static_cast<std::size_t>(m));
    op.delta.resize(static_cast<std::size_t>(m));

    auto xof = [&](int j) { return x_lo + h * j; };
    for (int j = first; j <= last; ++j) {
        auto L = lc.eval(xof(j));
        op.theta[static_cast<std::size_t>(j - first)] = L.t;
        op.delta[static_cast<std::size_t>(j - first)] = L.delta;
    }
    for (int el = 0; el < N; ++el) {
        auto Lm = lc.eval(xof(el) + 0.5 * h);
        double k = Lm.weight / h;
        double cross = 0.5 * Lm.ddelta * Lm.weight;
        int a = el - first, b = el + 1 - first;
        bool a_in = (el >= first && el <= last), b_in = (el + 1 >= first && el + 1 <= last);
        if (a_in) op.A_base.d[static_cast<std::size_t>(a)] += k - cross;
        if (b_in) op.A_base.d[static_cast<std::size_t>(b)] += k + cross;
        if (a_in && b_in) op.A_base.e[static_cast<std::size_t>(a)] -= k;
    }
    for (int j = first; j <= last; ++j) {
        double lo = std::max(x_lo, xof(j) - 0.5 * h);
        double hi = std::min(X, xof(j) + 0.5 * h);
        double cell = hi - lo;
        auto L = lc.eval(xof(j));
        std::size_t i = static_cast<std::size_t>(j - first);
        op.A_base.d[i] += 0.25 * L.ddelta * L.ddelta * L.weight * cell;
        op.Pdiag[i] = L.weight * cell;
        op.Mdiag[i] = L.delta * L.delta * L.weight * cell;
    }
    return op;
}

/// Negative inertia of (A - s B), B >= 0 diagonal: counts pencil eigenvalues
/// below s (A positive definite on ker B).
int pencil_count_below(const SymTridiag& A, const std::vector<double>& B, double s) {
    const std::size_t m = A.size();
    int count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        double di = A.d[i] - s * B[i];
        double e2 = (i > 0) ? A.e[i - 1] * A.e[i - 1] : 0.0;
        q = di - (i > 0 ? e2 / q : 0.0);
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

double pencil_eigenvalue(const SymTridiag& A, const std::vector<double>& B, int k,
                         double lo, double hi, double tol = 1e-13) {
    for (int guard = 0; pencil_count_below(A, B, lo) > k && guard < 80; ++guard)
        lo = lo * 2.0 - 1.0;
    for (int guard = 0; pencil_count_below(A, B, hi) <= k && guard < 80; ++guard)
        hi = hi * 2.0 + 1.0;
    while (hi - lo > tol + 1e-15 * (std::fabs(lo) + std::fabs(hi))) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (pencil_count_below(A, B, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

struct PencilPair {
    double value = 0.0;
    std::vector<double> vector; // B-normalized
    double residual = 0.0;      // ||(A - value B) v|| / (scale(A) ||v||)
};

PencilPair pencil_eigenpair(const SymTridiag& A, const std::vector<double>& B, int k,
                            double lo, double hi) {
    PencilPair out;
    out.value = pencil_eigenvalue(A, B, k, lo, hi);
    const std::size_t m = A.size();
    SymTridiag S = A;
    for (std::size_t i = 0; i < m; ++i) S.d[i] -= out.value * B[i];
    std::vector<double> v(m, 1.0);
    double scale = std::max(tridiag_scale(A), 1.0);
    for (int it = 0; it < 40; ++it) {
        std::vector<double> rhs(m);
        for (std::size_t i = 0; i < m; ++i) rhs[i] = B[i] * v[i];
        std::vector<double> w = tridiag_solve_shifted(S, 0.0, std::move(rhs));
        double nw = 0.0;
        for (std::size_t i = 0; i < m; ++i) nw += B[i] * w[i] * w[i];
        nw = std::sqrt(nw);
        if (!(nw > 0.0) || !std::isfinite(nw)) break;
        for (double& c : w) c /= nw;
        v = std::move(w);
        double rn = 0.0, vn = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double t = (A.d[i] - out.value * B[i]) * v[i];
            if (i > 0) t += A.e[i - 1] * v[i - 1];
            if (i + 1 < m) t += A.e[i] * v[i + 1];
            rn += t * t;
            vn += v[i] * v[i];
        }
        out.residual = std::sqrt(rn) / (scale * std::sqrt(vn));
        if (out.residual < 1e-14) break;
    }
    std::size_t imax = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
    if (v[imax] < 0.0)
        for (double& c : v) c = -c;
    out.vector = std::move(v);
    return out;
}

SpectralResult sigma_level_log(const ConeSpec& spec, double mu, double X, double dx) {
    LogOperator op = assemble_log(spec, X, dx);
    SymTridiag A = op.A_base;
    for (std::size_t i = 0; i < A.size(); ++i) A.d[i] -= mu * op.Pdiag[i];
    double c = 0.25 * (spec.dim() - 2) * (spec.dim() - 2);
    PencilPair p = pencil_eigenpair(A, op.Mdiag, 0, -c - 5.0, 50.0);
    SpectralResult r;
    r.sigma = p.value;
    r.sigma2 = pencil_eigenvalue(A, op.Mdiag, 1, p.value, 50.0);
    r.mu = mu;
    r.residual_norm = p.residual;
    r.nodes = op.theta;
    r.phi.resize(p.vector.size());
    for (std::size_t i = 0; i < r.phi.size(); ++i)
        r.phi[i] = std::sqrt(op.delta[i]) * p.vector[i];
    normalize_positive(r.phi);
    double hi = spec.is_sector() ? spec.sector().alpha : spec.cap().alpha;
    r.phi_fn = AngularFunction(r.nodes, r.phi, 0.0, hi, spec.is_sector(), true);
    return r;
}

} // namespace

DiscreteOperator assemble_sector(const ConeSpec& spec, double mu, int node_count,
                                 double grading) {
    if (!spec.is_sector()) throw std::invalid_argument("assemble_sector needs a sector");
    if (node_count < 16) throw std::invalid_argument("node_count must be >= 16");
    if (grading < 1.0) throw std::invalid_argument("grading must be >= 1");
    auto tn = graded_points(0.0, spec.sector().alpha, node_count, grading, true, true);
    return assemble_1d(spec, mu, tn, Weight1D{0}, true, true, DiscreteOperator::Kind::Sector1D);
}

DiscreteOperator assemble_cap(const ConeSpec& spec, double mu, int node_count, double grading) {
    if (!spec.is_cap()) throw std::invalid_argument("assemble_cap needs a cap");
    if (node_count < 16) throw std::invalid_argument("node_count must be >= 16");
    if (grading < 1.0) throw std::invalid_argument("grading must be >= 1");
    auto tn = graded_points(0.0, spec.cap().alpha, node_count, grading, false, true);
    return assemble_1d(spec, mu, tn, Weight1D{spec.dim() - 2}, false, true,
                       DiscreteOperator::Kind::Cap1D);
}

DiscreteOperator assemble_polygon(const ConeSpec& spec, double mu, double target_h) {
    if (!spec.is_polygon()) throw std::invalid_argument("assemble_polygon needs a polygon");
    if (!(target_h > 0.0 && target_h <= 0.2))
        throw std::invalid_argument("target mesh size must lie in (0, 0.2]");
    SphereMesh mesh = SphereMesh::disk_mesh(spec.polygon(), target_h);
    if (mesh.min_angle_deg() < 15.0)
        throw std::invalid_argument("mesh quality too poor: minimum angle below 15 degrees");

    DiscreteOperator op;
    op.kind = DiscreteOperator::Kind::PolygonFEM;
    op.n = 3;
    op.mu = mu;
    auto mesh_ptr = std::make_shared<SphereMesh>(std::move(mesh));
    op.mesh = mesh_ptr;
    const SphereMesh& M = *mesh_ptr;

    std::vector<int> retained_of_vertex(M.verts.size(), -1);
    for (std::size_t v = 0; v < M.verts.size(); ++v) {
        if (!M.on_boundary[v]) {
            retained_of_vertex[v] = static_cast<int>(op.retained_vertex.size());
            op.retained_vertex.push_back(static_cast<int>(v));
        }
    }
    const int m = static_cast<int>(op.retained_vertex.size());
    if (m == 0) throw std::invalid_argument("mesh has no interior vertices");

    op.mass.assign(static_cast<std::size_t>(m), 0.0);
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& t : M.tris) {
        const auto &a = M.verts[t[0]], &b = M.verts[t[1]], &c = M.verts[t[2]];
        std::array<double, 3> e0 = {c[0] - b[0], c[1] - b[1], c[2] - b[2]};
        std::array<double, 3> e1 = {a[0] - c[0], a[1] - c[1], a[2] - c[2]};
        std::array<double, 3> e2 = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
        std::array<double, 3> cr = {e2[1] * e1[2] - e2[2] * e1[1], e2[2] * e1[0] - e2[0] * e1[2],
                                    e2[0] * e1[1] - e2[1] * e1[0]};
        double area2 = std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
        double area = 0.5 * area2;
        const std::array<const std::array<double, 3>*, 3> es = {&e0, &e1, &e2};
        // flat-triangle P1 stiffness: K_ij = (e_i . e_j) / (4 area)
        for (int i = 0; i < 3; ++i) {
            int ri = retained_of_vertex[t[static_cast<std::size_t>(i)]];
            if (ri < 0) continue;
            op.mass[static_cast<std::size_t>(ri)] += area / 3.0;
            for (int j = 0; j < 3; ++j) {
                int rj = retained_of_vertex[t[static_cast<std::size_t>(j)]];
                if (rj < 0) continue;
                double kij = ((*es[i])[0] * (*es[j])[0] + (*es[i])[1] * (*es[j])[1] +
                              (*es[i])[2] * (*es[j])[2]) /
                             (4.0 * area);
                trips.emplace_back(ri, rj, kij);
            }
        }
    }
    op.stiffness_fem.resize(m, m);
    op.stiffness_fem.setFromTriplets(trips.begin(), trips.end());

    op.delta.resize(static_cast<std::size_t>(m));
    op.pot.resize(op.delta.size());
    for (int i = 0; i < m; ++i) {
        const auto& v = M.verts[static_cast<std::size_t>(op.retained_vertex[i])];
        op.delta[static_cast<std::size_t>(i)] =
            boundary_distance_delta(spec, PointOnSphere({v[0], v[1], v[2]}));
        double d = op.delta[static_cast<std::size_t>(i)];
        op.pot[static_cast<std::size_t>(i)] = op.mass[static_cast<std::size_t>(i)] / (d * d);
    }
    return op;
}

DiscreteOperator assemble(const ConeSpec& spec, double mu, int node_count, double grading) {
    if (spec.is_sector()) return assemble_sector(spec, mu, node_count, grading);
    if (spec.is_cap()) return assemble_cap(spec, mu, node_count, grading);
    double h = std::min(0.2, 8.0 / node_count);
    return assemble_polygon(spec, mu, h);
}

AngularFunction::AngularFunction(std::vector<double> coords, std::vector<double> values,
                                 double lo, double hi, bool zero_lo, bool zero_hi)
    : coords_(std::move(coords)), values_(std::move(values)), lo_(lo), hi_(hi),
      zero_lo_(zero_lo), zero_hi_(zero_hi) {
    if (coords_.size() != values_.size() || coords_.empty())
        throw std::invalid_argument("angular function size mismatch");
}

AngularFunction::AngularFunction(std::shared_ptr<const SphereMesh> mesh,
                                 std::vector<double> vertex_values)
    : mesh_(std::move(mesh)), vertex_values_(std::move(vertex_values)) {
    if (!mesh_ || vertex_values_.size() != mesh_->verts.size())
        throw std::invalid_argument("vertex value count mismatch");
}

double AngularFunction::at_coord(double t) const {
    if (mesh_) throw std::logic_error("FEM angular functions need a sphere point");
    if (t < lo_ - 1e-12 || t > hi_ + 1e-12)
        throw std::invalid_argument("coordinate outside the eigenfunction grid");
    if (t <= coords_.front())
        return zero_lo_ ? values_.front() * (t - lo_) / (coords_.front() - lo_) : values_.front();
    if (t >= coords_.back())
        return zero_hi_ ? values_.back() * (hi_ - t) / (hi_ - coords_.back()) : values_.back();
    auto it = std::upper_bound(coords_.begin(), coords_.end(), t);
    std::size_t j = static_cast<std::size_t>(it - coords_.begin());
    double w = (t - coords_[j - 1]) / (coords_[j] - coords_[j - 1]);
    return (1.0 - w) * values_[j - 1] + w * values_[j];
}

double AngularFunction::operator()(const PointOnSphere& p) const {
    if (mesh_) return mesh_->interpolate(vertex_values_, {p.x[0], p.x[1], p.x[2]});
    // sector grids live in the angle, cap grids in the polar angle; both grids
    // span [lo, hi] so the right coordinate is whichever lies inside
    double t = (p.dim() == 2) ? p.angle() : p.polar();
    return at_coord(t);
}

namespace {

SpectralResult eigenpair_1d(const DiscreteOperator& op) {
    const std::size_t m = op.size();
    std::vector<double> diagA(m), offA(op.stiffness.e);
    for (std::size_t i = 0; i < m; ++i) diagA[i] = op.stiffness.d[i] - op.mu * op.pot[i];
    SymTridiag T = symmetrize(diagA, offA, op.mass);
    TridiagEigenpair pair = tridiag_eigenpair(T, 0);
    if (!pair.converged) {
        std::ostringstream os;
        os << "eigenpair did not converge after " << pair.iterations
           << " iterations (residual " << pair.residual << ")";
        throw std::runtime_error(os.str());
    }
    SpectralResult r;
    r.sigma = pair.value;
    r.sigma2 = tridiag_eigenvalue(T, 1);
    r.mu = op.mu;
    r.nodes = op.nodes;
    r.residual_norm = pair.residual / std::max(tridiag_scale(T), 1.0);

    r.phi.resize(m);
    for (std::size_t i = 0; i < m; ++i) r.phi[i] = pair.vector[i] / std::sqrt(op.mass[i]);
    normalize_positive(r.phi);

    bool zero_lo = (op.kind == DiscreteOperator::Kind::Sector1D);
    r.phi_fn = AngularFunction(r.nodes, r.phi, op.interval_lo, op.interval_hi, zero_lo, true);
    return r;
}

SpectralResult eigenpair_fem(const DiscreteOperator& op) {
    using SpMat = Eigen::SparseMatrix<double>;
    const int m = static_cast<int>(op.size());
    SpMat A = op.stiffness_fem;
    if (op.mu != 0.0) {
        SpMat P(m, m);
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            trips.emplace_back(i, i, -op.mu * op.pot[static_cast<std::size_t>(i)]);
        P.setFromTriplets(trips.begin(), trips.end());
        A += P;
    }
    Eigen::VectorXd Mv = Eigen::Map<const Eigen::VectorXd>(op.mass.data(), m);

    // lower bound for the spectrum: x'Ax >= -mu_+ max(1/delta^2) x'Mx
    double lb = 0.0;
    if (op.mu > 0.0)
        for (int i = 0; i < m; ++i)
            lb = std::min(lb, -op.mu / (op.delta[static_cast<std::size_t>(i)] *
                                        op.delta[static_cast<std::size_t>(i)]));
    double shift = lb - 1.0;

    auto make_shifted = [&](double s) {
        SpMat S = A;
        for (int i = 0; i < m; ++i) S.coeffRef(i, i) -= s * Mv[i];
        return S;
    };

    Eigen::SimplicialLDLT<SpMat> solver;
    solver.compute(make_shifted(shift));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("sparse factorization failed in FEM eigensolve");

    Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
    v /= std::sqrt(v.dot(Mv.asDiagonal() * v));
    double lambda = 0.0;
    double rel_res = 1.0;
    int total_iters = 0;
    const double a_scale = [&] {
        double s = 1.0;
        for (int k = 0; k < A.outerSize(); ++k)
            for (SpMat::InnerIterator it(A, k); it; ++it)
                s = std::max(s, std::fabs(it.value()) / std::sqrt(Mv[it.row()] * Mv[it.col()]));
        return s;
    }();

    for (int phase = 0; phase < 3; ++phase) {
        for (int it = 0; it < 40; ++it) {
            ++total_iters;
            Eigen::VectorXd w = solver.solve(Mv.asDiagonal() * v);
            double nw = std::sqrt(w.dot(Mv.asDiagonal() * w));
            if (!(nw > 0.0) || !std::isfinite(nw)) break;
            w /= nw;
            v = w;
            Eigen::VectorXd Av = A * v;
            lambda = v.dot(Av);
            Eigen::VectorXd res = Av - lambda * (Mv.asDiagonal() * v);
            // symmetrized relative residual
            double rn = 0.0;
            for (int i = 0; i < m; ++i) rn += res[i] * res[i] / Mv[i];
            rel_res = std::sqrt(rn) / a_scale;
            if (rel_res < 1e-13) break;
        }
        if (rel_res < 1e-13) break;
        shift = lambda - 0.01 * (std::fabs(lambda) + 1.0);
        solver.compute(make_shifted(shift));
        if (solver.info() != Eigen::Success) break;
    }
    if (!(rel_res < 1e-10))
        throw std::runtime_error("FEM inverse iteration did not converge (relative residual " +
                                 std::to_string(rel_res) + " after " +
                                 std::to_string(total_iters) + " iterations)");

    // crude second eigenvalue: deflated inverse iteration
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    if (m > 1) u[0] = 1.0;
    double lambda2 = lambda;
    for (int it = 0; it < 25 && m > 1; ++it) {
        u -= u.dot(Mv.asDiagonal() * v) * v;
        Eigen::VectorXd w = solver.solve(Mv.asDiagonal() * u);
        double nw = std::sqrt(w.dot(Mv.asDiagonal() * w));
        if (!(nw > 0.0)) break;
        u = w / nw;
        lambda2 = u.dot(A * u) / u.dot(Mv.asDiagonal() * u);
    }

    SpectralResult r;
    r.sigma = lambda;
    r.sigma2 = lambda2;
    r.mu = op.mu;
    r.residual_norm = rel_res;
    r.phi.resize(static_cast<std::size_t>(m));
    double mx = 0.0;
    for (int i = 0; i < m; ++i) mx = std::max(mx, std::fabs(v[i]));
    int sign = 0;
    for (int i = 0; i < m; ++i)
        if (std::fabs(v[i]) > 0.5 * mx) {
            sign = v[i] > 0 ? 1 : -1;
            break;
        }
    for (int i = 0; i < m; ++i) r.phi[static_cast<std::size_t>(i)] = sign * v[i];
    normalize_positive(r.phi);
    std::vector<double> vertex_values(op.mesh->verts.size(), 0.0);
    for (int i = 0; i < m; ++i)
        vertex_values[static_cast<std::size_t>(op.retained_vertex[static_cast<std::size_t>(i)])] =
            r.phi[static_cast<std::size_t>(i)];
    r.phi_fn = AngularFunction(op.mesh, std::move(vertex_values));
    return r;
}

} // namespace

SpectralResult principal_eigenpair(const DiscreteOperator& op) {
    if (op.kind == DiscreteOperator::Kind::PolygonFEM) return eigenpair_fem(op);
    return eigenpair_1d(op);
}

SpectralResult sigma_of_mu(const ConeSpec& spec, double mu, int levels,
                           const SolveOptions& opt) {
    if (levels < 2) throw std::invalid_argument("sigma_of_mu needs at least 2 levels");
    if (mu > 0.25 + 0.1 + 1e-12)
        throw std::invalid_argument("mu > 1/4 + 0.1: use divergence_diagnostic");

    std::vector<double> sigmas;
    SpectralResult finest;
    if (opt.scheme == Scheme::BoundaryLog && !spec.is_polygon()) {
        if (mu > 0.25 + 1e-9)
            throw std::invalid_argument("stretched-coordinate scheme needs mu <= 1/4");
        for (int lev = 0; lev < levels; ++lev) {
            double X = opt.base_logspan * std::pow(2.0, lev);
            SpectralResult r = sigma_level_log(spec, mu, X, opt.log_dx);
            sigmas.push_back(r.sigma);
            std::vector<LevelEntry> acc = finest.levels;
            finest = std::move(r);
            finest.levels = std::move(acc);
            finest.levels.push_back({static_cast<int>(std::lround(X / opt.log_dx)),
                                     sigmas.back()});
        }
        Extrapolation ex = richardson(sigmas, 1.0); // truncation error ~ 1/X
        finest.sigma = ex.value;
        finest.extrapolated = ex.extrapolated;
        finest.measured_order = ex.order;
        finest.monotone_levels = ex.monotone;
        finest.mu = mu;
        return finest;
    }
    if (spec.is_polygon()) {
        std::vector<LevelEntry> acc;
        for (int lev = 0; lev < levels; ++lev) {
            double h = std::min(opt.polygon_h / std::pow(2.0, lev), 0.2);
            DiscreteOperator op = assemble_polygon(spec, mu, h);
            SpectralResult r = eigenpair_fem(op);
            sigmas.push_back(r.sigma);
            acc.push_back({static_cast<int>(op.size()), sigmas.back()});
            finest = std::move(r);
        }
        finest.levels = std::move(acc);
    } else {
        for (int lev = 0; lev < levels; ++lev) {
            int N = opt.base_nodes << lev;
            DiscreteOperator op = spec.is_sector() ? assemble_sector(spec, mu, N, opt.grading)
                                                   : assemble_cap(spec, mu, N, opt.grading);
            SpectralResult r = eigenpair_1d(op);
            sigmas.push_back(r.sigma);
            std::vector<LevelEntry> acc = finest.levels;
            finest = std::move(r);
            finest.levels = std::move(acc);
            finest.levels.push_back({N, sigmas.back()});
        }
    }
    Extrapolation ex = richardson(sigmas);
    finest.sigma = ex.value;
    finest.extrapolated = ex.extrapolated;
    finest.measured_order = ex.order;
    finest.monotone_levels = ex.monotone;
    finest.mu = mu;
    return finest;
}

namespace {

/// Smallest generalized eigenvalue mu of (K + c M) phi = mu P phi for one
/// assembled 1-D level.
double mu0_level_1d(const DiscreteOperator& op, double c) {
    const std::size_t m = op.size();
    std::vector<double> diagA(m);
    for (std::size_t i = 0; i < m; ++i) diagA[i] = op.stiffness.d[i] + c * op.mass[i];
    SymTridiag T = symmetrize(diagA, op.stiffness.e, op.pot);
    return tridiag_eigenvalue(T, 0);
}

double mu0_level_fem(const DiscreteOperator& op, double c) {
    using SpMat = Eigen::SparseMatrix<double>;
    const int m = static_cast<int>(op.size());
    SpMat A = op.stiffness_fem;
    for (int i = 0; i < m; ++i) A.coeffRef(i, i) += c * op.mass[static_cast<std::size_t>(i)];
    Eigen::VectorXd P(m);
    for (int i = 0; i < m; ++i) P[i] = op.pot[static_cast<std::size_t>(i)];
    Eigen::SimplicialLDLT<SpMat> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("factorization failed in mu0 eigensolve");
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
    double mu = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd w = solver.solve(P.asDiagonal() * v);
        double nw = std::sqrt(w.dot(P.asDiagonal() * w));
        if (!(nw > 0.0)) break;
        w /= nw;
        double mu_new = w.dot(A * w) / w.dot(P.asDiagonal() * w);
        bool done = std::fabs(mu_new - mu) < 1e-13 * std::max(1.0, std::fabs(mu_new));
        v = w;
        mu = mu_new;
        if (done && it > 3) break;
    }
    return mu;
}

} // namespace

Mu0Result mu0_compute(const ConeSpec& spec, int levels, const SolveOptions& opt) {
    if (levels < 1) throw std::invalid_argument("mu0_compute needs at least 1 level");
    const double c = 0.25 * (spec.dim() - 2) * (spec.dim() - 2);
    Mu0Result out;
    std::vector<double> mus;
    if (opt.scheme == Scheme::BoundaryLog && !spec.is_polygon()) {
        for (int lev = 0; lev < levels; ++lev) {
            double X = opt.base_logspan * std::pow(2.0, lev);
            LogOperator op = assemble_log(spec, X, opt.log_dx);
            SymTridiag A = op.A_base;
            for (std::size_t i = 0; i < A.size(); ++i) A.d[i] += c * op.Mdiag[i];
            mus.push_back(pencil_eigenvalue(A, op.Pdiag, 0, 0.0, 0.5));
            out.levels.push_back({static_cast<int>(std::lround(X / opt.log_dx)), mus.back()});
        }
    } else if (spec.is_polygon()) {
        for (int lev = 0; lev < levels; ++lev) {
            double h = std::min(opt.polygon_h / std::pow(2.0, lev), 0.2);
            DiscreteOperator op = assemble_polygon(spec, 0.0, h);
            mus.push_back(mu0_level_fem(op, c));
            out.levels.push_back({static_cast<int>(op.size()), mus.back()});
        }
    } else {
        for (int lev = 0; lev < levels; ++lev) {
            int N = opt.base_nodes << lev;
            DiscreteOperator op = spec.is_sector() ? assemble_sector(spec, 0.0, N, opt.grading)
                                                   : assemble_cap(spec, 0.0, N, opt.grading);
            mus.push_back(mu0_level_1d(op, c));
            out.levels.push_back({N, mus.back()});
        }
    }
    Extrapolation ex = richardson(mus);
    out.mu0_raw = ex.value;
    out.method = "generalized-eigenproblem";
    out.mu0 = out.mu0_raw;
    if (out.mu0 > 0.25) {
        // weakly-mean-convex regime: the continuum value cannot exceed 1/4
        out.mu0 = 0.25;
        out.clamped = true;
    }

    if (out.mu0_raw < 0.25 - 1e-3) {
        // cross-check: root of sigma(mu) + (n-2)^2/4 in (0, 1/4]
        const int xlev = std::max(levels, 2);
        auto g = [&](double mu) { return sigma_of_mu(spec, mu, xlev, opt).sigma + c; };
        double lo = 0.0, hi = 0.25;
        double glo = g(1e-6);
        if (glo <= 0.0) {
            out.flagged = true;
        } else {
            double ghi = g(hi);
            if (ghi > 0.0) {
                out.flagged = true; // no root below 1/4: methods disagree structurally
            } else {
                for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (g(mid) > 0.0 ? lo : hi) = mid;
                }
                out.mu0_bisection = 0.5 * (lo + hi);
                out.cross_check_gap = std::fabs(*out.mu0_bisection - out.mu0_raw);
                out.method = "generalized-eigenproblem+cross-check";
                if (out.cross_check_gap > 1e-2) out.flagged = true;
            }
        }
    }
    if (!(out.mu0 > 0.0)) out.flagged = true;
    return out;
}

DivergenceReport divergence_diagnostic(const ConeSpec& spec, double mu, int levels,
                                       int base_nodes, double grading) {
    if (mu < 0.25 - 1e-12)
        throw std::invalid_argument("divergence diagnostic expects mu >= 1/4");
    if (levels < 2) throw std::invalid_argument("need at least 2 levels");
    DivergenceReport rep;
    for (int lev = 0; lev < levels; ++lev) {
        int N = base_nodes << lev;
        DiscreteOperator op = spec.is_sector() ? assemble_sector(spec, mu, N, grading)
                                               : assemble_cap(spec, mu, N, grading);
        // only the eigenvalue is needed; the eigenvector positivity check is
        // skipped because deep collapse modes concentrate at the boundary
        std::vector<double> diagA(op.size());
        for (std::size_t i = 0; i < op.size(); ++i)
            diagA[i] = op.stiffness.d[i] - mu * op.pot[i];
        SymTridiag T = symmetrize(diagA, op.stiffness.e, op.mass);
        rep.levels.push_back({N, tridiag_eigenvalue(T, 0)});
    }
    rep.strictly_decreasing = true;
    for (std::size_t i = 1; i < rep.levels.size(); ++i)
        if (!(rep.levels[i].sigma < rep.levels[i - 1].sigma)) rep.strictly_decreasing = false;
    rep.divergent = rep.strictly_decreasing && rep.levels.back().sigma < -1e3;
    return rep;
}

std::vector<double> exhaustion_monotonicity(const ConeSpec& spec, double mu,
                                            const std::vector<double>& shrink_fractions,
                                            int node_count) {
    if (shrink_fractions.size() < 2)
        throw std::invalid_argument("need at least two fractions");
    for (std::size_t i = 1; i < shrink_fractions.size(); ++i)
        if (!(shrink_fractions[i] > shrink_fractions[i - 1]))
            throw std::invalid_argument("fractions must be strictly increasing");
    if (!(shrink_fractions.front() > 0.0 && shrink_fractions.back() <= 1.0))
        throw std::invalid_argument("fractions must lie in (0, 1]");
    if (spec.is_polygon())
        throw std::invalid_argument("exhaustion check supports sector/cap cross-sections");

    std::vector<double> out;
    const double alpha = spec.is_sector() ? spec.sector().alpha : spec.cap().alpha;
    for (double f : shrink_fractions) {
        DiscreteOperator op;
        if (spec.is_sector()) {
            double lo = 0.5 * (1.0 - f) * alpha, hi = 0.5 * (1.0 + f) * alpha;
            auto tn = graded_points(lo, hi, node_count, 1.0, false, false);
            op = assemble_1d(spec, mu, tn, Weight1D{0}, true, true,
                             DiscreteOperator::Kind::Sector1D);
        } else {
            auto tn = graded_points(0.0, f * alpha, node_count, 1.0, false, false);
            op = assemble_1d(spec, mu, tn, Weight1D{spec.dim() - 2}, false, true,
                             DiscreteOperator::Kind::Cap1D);
        }
        out.push_back(eigenpair_1d(op).sigma);
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] < out[i - 1]))
            throw std::runtime_error("exhaustion eigenvalues are not strictly decreasing");
    return out;
}

AgmonCheckResult agmon_supersolution_check(const ConeSpec& spec, double epsilon,
                                           double band_width) {
    if (!(epsilon > 0.0 && epsilon < 1.5))
        throw std::invalid_argument("epsilon must lie in (0, 3/2)");
    if (spec.is_polygon())
        throw std::invalid_argument("supersolution collar check needs a C^2 cross-section");
    const double alpha = spec.is_sector() ? spec.sector().alpha : spec.cap().alpha;
    if (!(band_width > 0.0 && band_width < 0.45 * std::min(alpha, kPi)))
        throw std::invalid_argument("band width is not a collar for this cross-section");

    // g = delta^{1/2} - delta/2 as a function of the boundary distance d,
    // delta = sin(d) on the collar of a C^2 cross-section
    auto gfun = [](double d) {
        double s = std::sin(d);
        return std::sqrt(s) - 0.5 * s;
    };
    const int n = spec.dim();
    // (-Laplace_S g)(d) by central differences in the 1-D reduced variable
    auto neg_lap = [&](double d) {
        double h = std::max(1e-9, 1e-3 * d);
        double gm = gfun(d - h), g0 = gfun(d), gp = gfun(d + h);
        double second = (gp - 2.0 * g0 + gm) / (h * h);
        if (spec.is_sector()) return -second;
        // cap: t = alpha - d, Laplace = d^2/dt^2 + (n-2) cot(t) d/dt;
        // dg/dt = -dg/dd
        double t = spec.cap().alpha - d;
        double first_d = (gp - gm) / (2.0 * h);
        return -second + (n - 2) * (std::cos(t) / std::sin(t)) * first_d;
    };

    const int kSamples = 400;
    std::vector<double> ds(kSamples), base(kSamples), weight(kSamples);
    for (int i = 0; i < kSamples; ++i) {
        double f = static_cast<double>(i) / (kSamples - 1);
        double d = band_width * std::pow(1e-3, 1.0 - f); // log-spaced collar
        ds[static_cast<std::size_t>(i)] = d;
        double delta = std::sin(d);
        double g = gfun(d);
        base[static_cast<std::size_t>(i)] = neg_lap(d) - g / (4.0 * delta * delta);
        weight[static_cast<std::size_t>(i)] = g / std::pow(delta, epsilon);
    }
    auto min_at = [&](double cc) {
        double mn = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kSamples; ++i)
            mn = std::min(mn, base[static_cast<std::size_t>(i)] -
                                  cc * weight[static_cast<std::size_t>(i)]);
        return mn;
    };

    AgmonCheckResult res;
    res.samples = static_cast<std::size_t>(kSamples);
    if (min_at(1e-9) < 0.0)
        throw std::runtime_error("collar too wide: expression negative for all c > 0; "
                                 "retry with a smaller band");
    double lo = 0.0, hi = 1.0;
    while (min_at(hi) >= 0.0 && hi < 1e12) hi *= 2.0;
    if (hi >= 1e12) {
        res.c_max = hi;
        res.min_value = min_at(hi);
        return res;
    }
    while (hi - lo > 1e-6) {
        double mid = 0.5 * (lo + hi);
        (min_at(mid) >= 0.0 ? lo : hi) = mid;
    }
    res.c_max = lo;
    res.min_value = min_at(lo);
    return res;
}

} // namespace conehardy
