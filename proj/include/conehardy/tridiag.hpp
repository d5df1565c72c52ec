#pragma once

#include <cstddef>
#include <vector>

namespace conehardy {

/// Symmetric tridiagonal matrix: diagonal d[0..m), off-diagonal e[0..m-1).
struct SymTridiag {
    std::vector<double> d;
    std::vector<double> e;

    std::size_t size() const { return d.size(); }
};

/// Number of eigenvalues of T strictly below x (Sturm sequence count).
int sturm_count_below(const SymTridiag& T, double x);

/// k-th smallest eigenvalue (k = 0 is the smallest) by bisection to
/// absolute tolerance `tol` plus a relative eps guard.
double tridiag_eigenvalue(const SymTridiag& T, int k, double tol = 1e-13);

struct TridiagEigenpair {
    double value = 0.0;
    std::vector<double> vector;   // 2-norm 1, first nonzero component positive
    double residual = 0.0;        // ||T v - value v||_2
    int iterations = 0;
    bool converged = false;
};

/// Eigenpair for the k-th smallest eigenvalue: bisection for the value,
/// inverse iteration with a pivoted tridiagonal solve for the vector.
TridiagEigenpair tridiag_eigenpair(const SymTridiag& T, int k, double tol = 1e-13);

/// Solves (T - shift I) x = b with partial pivoting; safe for nearly
/// singular shifts (inverse iteration use).
std::vector<double> tridiag_solve_shifted(const SymTridiag& T, double shift,
                                          std::vector<double> b);

} // namespace conehardy
