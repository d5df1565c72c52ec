#include "conehardy/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conehardy {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Gershgorin bounds [lo, hi] containing the whole spectrum.
std::pair<double, double> gershgorin(const SymTridiag& T) {
    const std::size_t m = T.size();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < m; ++i) {
        double r = (i > 0 ? std::fabs(T.e[i - 1]) : 0.0) + (i + 1 < m ? std::fabs(T.e[i]) : 0.0);
        lo = std::min(lo, T.d[i] - r);
        hi = std::max(hi, T.d[i] + r);
    }
    return {lo, hi};
}
} // namespace

int sturm_count_below(const SymTridiag& T, double x) {
    const std::size_t m = T.size();
    int count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        double e2 = (i > 0) ? T.e[i - 1] * T.e[i - 1] : 0.0;
        q = (T.d[i] - x) - (i > 0 ? e2 / q : 0.0);
        if (q == 0.0) q = -kEps * (std::fabs(T.d[i]) + std::fabs(x) + 1.0);
        if (q < 0.0) ++count;
    }
    return count;
}

double tridiag_eigenvalue(const SymTridiag& T, int k, double tol) {
    if (T.size() == 0) throw std::invalid_argument("empty tridiagonal system");
    if (k < 0 || static_cast<std::size_t>(k) >= T.size())
        throw std::invalid_argument("eigenvalue index out of range");
    auto [lo, hi] = gershgorin(T);
    // invariant: count(lo) <= k < count(hi)
    while (hi - lo > tol + kEps * (std::fabs(lo) + std::fabs(hi))) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // interval at rounding resolution
        if (sturm_count_below(T, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> tridiag_solve_shifted(const SymTridiag& T, double shift,
                                          std::vector<double> b) {
    const std::size_t m = T.size();
    if (b.size() != m) throw std::invalid_argument("rhs size mismatch");
    // LU with partial pivoting on [sub | diag | super | super2]
    std::vector<double> diag(m), sup(m, 0.0), sup2(m, 0.0);
    std::vector<double> sub(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        diag[i] = T.d[i] - shift;
        if (i + 1 < m) {
            sup[i] = T.e[i];
            sub[i + 1] = T.e[i];
        }
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (std::fabs(sub[i + 1]) > std::fabs(diag[i])) {
            std::swap(diag[i], sub[i + 1]);
            std::swap(sup[i], diag[i + 1]);
            std::swap(sup2[i], sup[i + 1]);
            std::swap(b[i], b[i + 1]);
        }
        if (diag[i] == 0.0) diag[i] = kEps;
        double l = sub[i + 1] / diag[i];
        diag[i + 1] -= l * sup[i];
        sup[i + 1] -= l * sup2[i];
        b[i + 1] -= l * b[i];
    }
    if (diag[m - 1] == 0.0) diag[m - 1] = kEps;
    std::vector<double>& x = b;
    x[m - 1] /= diag[m - 1];
    if (m >= 2) x[m - 2] = (x[m - 2] - sup[m - 2] * x[m - 1]) / diag[m - 2];
    for (std::size_t ii = m; ii-- > 2;) {
        std::size_t i = ii - 2;
        x[i] = (x[i] - sup[i] * x[i + 1] - sup2[i] * x[i + 2]) / diag[i];
    }
    return x;
}

TridiagEigenpair tridiag_eigenpair(const SymTridiag& T, int k, double tol) {
    TridiagEigenpair out;
    out.value = tridiag_eigenvalue(T, k, tol);
    const std::size_t m = T.size();

    std::vector<double> v(m, 1.0);
    double nv = std::sqrt(static_cast<double>(m));
    for (double& c : v) c /= nv;

    auto [lo, hi] = gershgorin(T);
    double scale = std::max(std::fabs(lo), std::fabs(hi));
    const int max_iter = 50;
    for (int it = 0; it < max_iter; ++it) {
        ++out.iterations;
        std::vector<double> w = tridiag_solve_shifted(T, out.value, v);
        double nw = 0.0;
        for (double c : w) nw += c * c;
        nw = std::sqrt(nw);
        if (!(nw > 0.0) || !std::isfinite(nw)) break;
        for (double& c : w) c /= nw;
        v = std::move(w);
        // residual
        double res = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double t = (T.d[i] - out.value) * v[i];
            if (i > 0) t += T.e[i - 1] * v[i - 1];
            if (i + 1 < m) t += T.e[i] * v[i + 1];
            res += t * t;
        }
        out.residual = std::sqrt(res);
        if (out.residual <= 64.0 * kEps * scale || out.residual <= 1e-13) {
            out.converged = true;
            break;
        }
    }
    // sign convention: largest-magnitude component positive
    std::size_t imax = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
    if (v[imax] < 0.0)
        for (double& c : v) c = -c;
    out.vector = std::move(v);
    if (!out.converged && out.residual <= 1e-8 * std::max(1.0, scale)) out.converged = true;
    return out;
}

} // namespace conehardy
