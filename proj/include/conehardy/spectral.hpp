#pragma once

#include <Eigen/SparseCore>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "conehardy/geometry.hpp"
#include "conehardy/mesh.hpp"
#include "conehardy/tridiag.hpp"

namespace conehardy {

/// Discretization of -Laplace_S - mu/delta^2 on the cross-section with
/// Dirichlet conditions on its boundary.
///
/// The generalized eigenproblem solved is
///     (K - mu * P) phi = sigma * M phi
/// where K is the Dirichlet form of -Laplace_S, M the lumped mass and
/// P the delta^{-2}-weighted lumped mass. Boundary nodes are eliminated.
struct DiscreteOperator {
    enum class Kind { Sector1D, Cap1D, PolygonFEM };

    Kind kind;
    int n = 2;       // ambient dimension
    double mu = 0.0; // potential strength
    std::string boundary = "dirichlet";

    // retained (non-Dirichlet) nodes
    std::vector<double> nodes;  // 1-D coordinate (theta or polar t); empty for FEM
    std::vector<double> delta;  // boundary distance at each retained node
    std::vector<double> mass;   // M diagonal
    std::vector<double> pot;    // P diagonal = mass / delta^2
    double interval_lo = 0.0;   // 1-D interval covered (including eliminated ends)
    double interval_hi = 0.0;

    // 1-D stiffness (tridiagonal quadratic form)
    SymTridiag stiffness;

    // FEM stiffness over retained vertices
    Eigen::SparseMatrix<double> stiffness_fem;
    std::shared_ptr<const SphereMesh> mesh;  // full mesh, for interpolation
    std::vector<int> retained_vertex;        // retained index -> mesh vertex

    std::size_t size() const { return mass.size(); }
    /// Pointwise potential value mu/delta^2 at a retained node.
    double potential_diag(std::size_t i) const { return mu / (delta[i] * delta[i]); }
};

DiscreteOperator assemble_sector(const ConeSpec& spec, double mu, int node_count,
                                 double grading = 1.0);
DiscreteOperator assemble_cap(const ConeSpec& spec, double mu, int node_count,
                              double grading = 1.0);
DiscreteOperator assemble_polygon(const ConeSpec& spec, double mu, double target_h);
/// Shape dispatch: for polygons, node_count is mapped to a target mesh size.
DiscreteOperator assemble(const ConeSpec& spec, double mu, int node_count,
                          double grading = 1.0);

/// Piecewise-linear evaluation of an eigenfunction on its solver grid.
class AngularFunction {
  public:
    AngularFunction() = default;
    /// 1-D grid: coords must be increasing and cover [lo, hi] up to the
    /// eliminated Dirichlet nodes (value 0 there).
    AngularFunction(std::vector<double> coords, std::vector<double> values, double lo,
                    double hi, bool zero_lo, bool zero_hi);
    AngularFunction(std::shared_ptr<const SphereMesh> mesh, std::vector<double> vertex_values);

    /// Value at 1-D coordinate t (angle for sector, polar angle for cap).
    double at_coord(double t) const;
    double operator()(const PointOnSphere& p) const;
    bool is_fem() const { return mesh_ != nullptr; }

  private:
    std::vector<double> coords_, values_;
    double lo_ = 0.0, hi_ = 0.0;
    bool zero_lo_ = true, zero_hi_ = true;
    std::shared_ptr<const SphereMesh> mesh_;
    std::vector<double> vertex_values_;
};

struct LevelEntry {
    int resolution;  // interval count (1-D) or vertex count (FEM)
    double sigma;
};

struct SpectralResult {
    double sigma = 0.0;          // extrapolated when `extrapolated`, else finest level
    double mu = 0.0;
    std::vector<double> nodes;   // retained node coordinates (1-D)
    std::vector<double> phi;     // principal eigenfunction, max-normalized
    AngularFunction phi_fn;      // grid interpolant of phi
    double residual_norm = 0.0;  // relative residual of the symmetrized solve
    std::vector<LevelEntry> levels;
    bool extrapolated = false;
    double measured_order = 0.0; // observed convergence order across levels
    bool monotone_levels = true;
    double sigma2 = 0.0;         // second eigenvalue (simplicity check)
};

/// Principal (smallest) eigenpair of an assembled operator. Throws on
/// non-convergence or an eigenvector sign change.
SpectralResult principal_eigenpair(const DiscreteOperator& op);

/// Discretization scheme for the 1-D reductions.
///  - Direct: nodes in the angular variable, pointwise potential; second
///    order away from criticality.
///  - BoundaryLog: solve for v = phi / sqrt(delta) in the stretched
///    coordinate x with dx = dt/delta, where the 1/delta^2 singularity
///    cancels; coefficients stay bounded and the only systematic error is
///    the O(1/X) domain truncation, removed by extrapolation over
///    X-doublings. Required for reliable digits at mu near 1/4.
enum class Scheme { Direct, BoundaryLog };

struct SolveOptions {
    int base_nodes = 1024;  // intervals at the coarsest level (Direct)
    double grading = 1.0;
    double polygon_h = 0.1; // coarsest-level target mesh size
    Scheme scheme = Scheme::Direct;
    double base_logspan = 60.0; // X at the coarsest BoundaryLog level
    double log_dx = 0.02;       // uniform spacing in the stretched coordinate
};

/// sigma(mu) with Richardson extrapolation over `levels` grid doublings.
/// Requires mu <= 1/4 + 0.1; larger mu belongs to divergence_diagnostic.
SpectralResult sigma_of_mu(const ConeSpec& spec, double mu, int levels,
                           const SolveOptions& opt = {});

struct Mu0Result {
    double mu0 = 0.0;            // reported value, clamped to <= 0.25
    double mu0_raw = 0.0;        // generalized-eigenvalue estimate before clamping
    std::string method;          // "generalized-eigenproblem" or "+cross-check"
    std::optional<double> mu0_bisection; // sigma-root value when cross-checked
    double cross_check_gap = 0.0;
    bool flagged = false;
    std::vector<LevelEntry> levels;
    bool clamped = false;
};

/// mu0 = lambda_0(-Laplace_S + (n-2)^2/4, delta^{-2}, Sigma) via the smallest
/// generalized eigenvalue of (K + c M) phi = mu P phi; cross-checked against
/// the root of sigma(mu) + (n-2)^2/4 when clearly below 1/4.
Mu0Result mu0_compute(const ConeSpec& spec, int levels, const SolveOptions& opt = {});

struct DivergenceReport {
    std::vector<LevelEntry> levels;
    bool strictly_decreasing = false;
    bool divergent = false; // decreasing and final < -1e3
};

/// Discrete sigma_h trend for mu > 1/4 (Prop: sigma = -infinity there).
/// Boundary-graded meshes resolve the collapse; `levels` doublings from
/// base_nodes.
DivergenceReport divergence_diagnostic(const ConeSpec& spec, double mu, int levels,
                                       int base_nodes = 256, double grading = 2.0);

/// sigma on cross-sections shrunk to the given fractions of the angular
/// extent (compactly contained exhaustion; potential from the full cone).
/// Returns one sigma per fraction; throws if not strictly decreasing.
std::vector<double> exhaustion_monotonicity(const ConeSpec& spec, double mu,
                                            const std::vector<double>& shrink_fractions,
                                            int node_count = 2048);

struct AgmonCheckResult {
    double c_max = 0.0;     // largest c with nonnegative collar values
    double min_value = 0.0; // collar minimum at c_max
    std::size_t samples = 0;
};

/// Largest c > 0 such that (-Laplace_S - 1/(4 delta^2) - c/delta^eps) applied
/// to delta^{1/2} - delta/2 stays nonnegative on the collar d_Sigma < band.
/// Sector/cap only; eps must lie in (0, 3/2).
AgmonCheckResult agmon_supersolution_check(const ConeSpec& spec, double epsilon,
                                           double band_width);

} // namespace conehardy
