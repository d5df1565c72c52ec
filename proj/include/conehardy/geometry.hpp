#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace conehardy {

/// Planar sector cross-section {theta in (0, alpha)} of the unit circle (n = 2).
struct Sector {
    double alpha; // opening angle, 0 < alpha < 2*pi
};

/// Axisymmetric cap {polar angle < alpha} about the x1-axis (n >= 3).
struct Cap {
    double alpha; // polar half-angle, 0 < alpha < pi
};

/// Simple closed spherical polygon on S^2 bounded by great-circle arcs (n = 3).
struct SphericalPolygon {
    std::vector<std::array<double, 3>> vertices; // unit vectors, >= 3, pairwise distinct
};

using CrossSection = std::variant<Sector, Cap, SphericalPolygon>;

/// A cone {x : |x| > 0, x/|x| in Sigma} given by its dimension and cross-section.
/// Validates the shape/dimension pairing on construction.
class ConeSpec {
  public:
    ConeSpec(int n, CrossSection cross_section);

    int dim() const { return n_; }
    const CrossSection& cross_section() const { return cs_; }

    bool is_sector() const { return std::holds_alternative<Sector>(cs_); }
    bool is_cap() const { return std::holds_alternative<Cap>(cs_); }
    bool is_polygon() const { return std::holds_alternative<SphericalPolygon>(cs_); }

    const Sector& sector() const { return std::get<Sector>(cs_); }
    const Cap& cap() const { return std::get<Cap>(cs_); }
    const SphericalPolygon& polygon() const { return std::get<SphericalPolygon>(cs_); }

    /// Short human-readable tag, e.g. "sector(alpha=1.5708,n=2)".
    std::string describe() const;

    /// Points per boundary edge used for polygon distance queries.
    static constexpr int kPolygonBoundarySamples = 4096;

  private:
    int n_;
    CrossSection cs_;
};

/// Point on the unit sphere S^{n-1}; stored as a full coordinate vector,
/// |x| = 1 within 1e-12.
struct PointOnSphere {
    std::vector<double> x;

    explicit PointOnSphere(std::vector<double> coords);

    /// n = 2 convenience: (cos theta, sin theta).
    static PointOnSphere from_angle(double theta);
    /// Cap convenience: polar angle t from the x1-axis, remaining mass on x2
    /// (axisymmetric problems only depend on t).
    static PointOnSphere from_polar(int n, double t);

    int dim() const { return static_cast<int>(x.size()); }
    /// Angle in the plane for n = 2 points, in [0, 2*pi).
    double angle() const;
    /// Polar angle from the x1-axis, in [0, pi].
    double polar() const;
};

enum class RegionKind { Inner, Outer, Annulus };

/// Radial truncation {r_min < |x| < r_max} of a cone.
struct TruncatedRegion {
    double r_min;
    double r_max;
    RegionKind kind;

    TruncatedRegion(double rmin, double rmax, RegionKind k);
    /// The annulus A_R = {R/2 <= |z| <= 2R}.
    static TruncatedRegion annulus(double R) { return {R / 2.0, 2.0 * R, RegionKind::Annulus}; }
};

/// Great-circle distance from p to the boundary of the cross-section.
double geodesic_boundary_distance(const ConeSpec& spec, const PointOnSphere& p);

/// Euclidean distance from the unit vector p to the boundary cone
/// {r*y : y in dSigma, r >= 0}; equals sin(min(d_Sigma, pi/2)).
/// Zero iff p lies on dSigma. Rejects p outside the closure of Sigma.
double boundary_distance_delta(const ConeSpec& spec, const PointOnSphere& p);

/// delta_Omega at an arbitrary point of the cone (homogeneous of degree 1):
/// |x| * delta(x/|x|).
double delta_at(const ConeSpec& spec, const std::vector<double>& x);

/// True if the direction of x lies in the open cross-section.
bool contains_direction(const ConeSpec& spec, const std::vector<double>& x, double tol = 0.0);

struct EulerCheckResult {
    double max_residual = 0.0;         // max |x . grad(delta) - delta|
    std::size_t rejected_samples = 0;  // ridge-adjacent samples skipped
};

/// Checks the homogeneity identity x . grad(delta) = delta at interior samples
/// with central differences of step fd_step. Samples where one-sided gradients
/// disagree by more than 1e-3 relative are counted as ridge-adjacent and skipped.
EulerCheckResult euler_identity_check(const ConeSpec& spec,
                                      const std::vector<std::vector<double>>& samples,
                                      double fd_step);

/// Tensor grid over a truncated region with positive quadrature weights.
/// Radial cells carry their exact integral of r^{n-1} dr, so the weight total
/// reproduces the region volume independently of resolution (sector/cap).
struct RegionGrid {
    std::vector<double> r;         // radial nodes
    std::vector<double> wr;        // radial weights, sum = integral of r^{n-1} dr
    std::vector<double> ang;       // angular nodes (theta for sector, polar t for cap)
    std::vector<double> wang;      // angular weights, sum = cross-section surface measure
    std::vector<double> delta_ang; // delta on the sphere at the angular nodes
    double total_weight = 0.0;     // sum of the tensor weights = region volume
};

RegionGrid sample_region_grid(const ConeSpec& spec, const TruncatedRegion& region,
                              int radial_nodes, int angular_nodes);

/// Surface measure |S^{m}| of the unit m-sphere.
double sphere_surface_measure(int m);

/// Cross-section surface area (sector: alpha; cap: |S^{n-2}| * int sin^{n-2}).
double cross_section_area(const ConeSpec& spec);

} // namespace conehardy
