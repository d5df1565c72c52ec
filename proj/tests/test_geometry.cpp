#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conehardy/geometry.hpp"
#include "conehardy/rng.hpp"
#include "oracles.hpp"

using namespace conehardy;
namespace {
constexpr double kPi = std::numbers::pi;

SphericalPolygon octant_triangle() {
    return SphericalPolygon{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}
} // namespace

TEST_CASE("cone spec invariants") {
    CHECK_THROWS(ConeSpec(3, Sector{kPi}));
    CHECK_THROWS(ConeSpec(2, Sector{0.0}));
    CHECK_THROWS(ConeSpec(2, Sector{7.0})); // > 2*pi
    CHECK_THROWS(ConeSpec(2, Cap{kPi / 2}));
    CHECK_THROWS(ConeSpec(3, Cap{kPi}));
    CHECK_THROWS(ConeSpec(2, octant_triangle()));
    CHECK_THROWS(ConeSpec(3, SphericalPolygon{{{1, 0, 0}, {0, 1, 0}}}));
    CHECK_NOTHROW(ConeSpec(2, Sector{3 * kPi / 2}));
    CHECK_NOTHROW(ConeSpec(5, Cap{kPi / 2}));
    CHECK_NOTHROW(ConeSpec(3, octant_triangle()));
}

TEST_CASE("point on sphere validation") {
    CHECK_THROWS(PointOnSphere({1.0, 1.0}));
    CHECK_NOTHROW(PointOnSphere({0.0, 0.0, 1.0}));
    CHECK(PointOnSphere::from_angle(0.3).angle() == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(PointOnSphere::from_polar(4, 0.7).polar() == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("sector boundary distance") {
    ConeSpec half_plane(2, Sector{kPi});
    CHECK(boundary_distance_delta(half_plane, PointOnSphere::from_angle(kPi / 2)) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(boundary_distance_delta(half_plane, PointOnSphere::from_angle(kPi / 4)) ==
          doctest::Approx(std::sin(kPi / 4)).epsilon(1e-14));
    CHECK(geodesic_boundary_distance(half_plane, PointOnSphere::from_angle(kPi / 4)) ==
          doctest::Approx(kPi / 4).epsilon(1e-14));
    CHECK(boundary_distance_delta(half_plane, PointOnSphere::from_angle(0.0)) == 0.0);
    CHECK_THROWS(boundary_distance_delta(half_plane, PointOnSphere::from_angle(1.5 * kPi)));
}

TEST_CASE("non-convex sector distance hits the vertex") {
    ConeSpec spec(2, Sector{3 * kPi / 2});
    // interior bisector: both boundary rays subtend obtuse angles
    CHECK(boundary_distance_delta(spec, PointOnSphere::from_angle(3 * kPi / 4)) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("cap boundary distance") {
    ConeSpec hemi(3, Cap{kPi / 2});
    CHECK(boundary_distance_delta(hemi, PointOnSphere::from_polar(3, 0.0)) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(geodesic_boundary_distance(hemi, PointOnSphere::from_polar(3, kPi / 6)) ==
          doctest::Approx(kPi / 3).epsilon(1e-14));
    CHECK_THROWS(boundary_distance_delta(hemi, PointOnSphere::from_polar(3, 2.0)));
}

TEST_CASE("near-boundary delta equals sin of geodesic distance") {
    ConeSpec sec(2, Sector{2.0});
    ConeSpec cap(5, Cap{1.2});
    for (double d : {0.09, 0.05, 0.01, 0.001}) {
        auto p = PointOnSphere::from_angle(d);
        CHECK(std::fabs(boundary_distance_delta(sec, p) -
                        std::sin(geodesic_boundary_distance(sec, p))) <= 1e-12);
        auto q = PointOnSphere::from_polar(5, 1.2 - d);
        CHECK(std::fabs(boundary_distance_delta(cap, q) -
                        std::sin(geodesic_boundary_distance(cap, q))) <= 1e-12);
    }
}

TEST_CASE("sector symmetry and homogeneity") {
    ConeSpec spec(2, Sector{2.4});
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        double th = rng.uniform(1e-3, 2.4 - 1e-3);
        double d1 = boundary_distance_delta(spec, PointOnSphere::from_angle(th));
        double d2 = boundary_distance_delta(spec, PointOnSphere::from_angle(2.4 - th));
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-13));
        CHECK(d1 >= 0.0);
        CHECK(d1 <= 1.0);
        CHECK(d1 <= std::sin(std::min(geodesic_boundary_distance(
                                          spec, PointOnSphere::from_angle(th)),
                                      kPi / 2)) +
                  1e-14);
        double s = rng.uniform(0.1, 10.0);
        std::vector<double> x = {std::cos(th), std::sin(th)};
        std::vector<double> sx = {s * x[0], s * x[1]};
        CHECK(delta_at(spec, sx) == doctest::Approx(s * delta_at(spec, x)).epsilon(1e-14));
    }
}

TEST_CASE("polygon delta agrees with the dense boundary-ray oracle") {
    ConeSpec spec(3, octant_triangle());
    double inv = 1.0 / std::sqrt(3.0);
    PointOnSphere centroid({inv, inv, inv});
    double got = boundary_distance_delta(spec, centroid);
    double want = oracles::polygon_delta_bruteforce(octant_triangle(), {inv, inv, inv}, 1000000);
    CHECK(std::fabs(got - want) <= 1e-6);
    // octant centroid in closed form: nearest boundary is any coordinate plane
    CHECK(got == doctest::Approx(inv).epsilon(1e-9));

    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        // random interior directions (positive octant)
        std::array<double, 3> v = {rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0),
                                   rng.uniform(0.05, 1.0)};
        double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        v = {v[0] / nv, v[1] / nv, v[2] / nv};
        double lib = boundary_distance_delta(spec, PointOnSphere({v[0], v[1], v[2]}));
        double brute = oracles::polygon_delta_bruteforce(octant_triangle(), v, 300000);
        CHECK(std::fabs(lib - brute) <= 1e-6);
    }
    CHECK_THROWS(boundary_distance_delta(spec, PointOnSphere({-inv, inv, inv})));
}

TEST_CASE("euler identity for smooth sector points") {
    ConeSpec spec(2, Sector{kPi / 2});
    double th = kPi / 8;
    std::vector<std::vector<double>> samples = {{2.0 * std::cos(th), 2.0 * std::sin(th)}};
    auto res = euler_identity_check(spec, samples, 1e-4);
    CHECK(res.rejected_samples == 0);
    CHECK(res.max_residual <= 1e-7);
}

TEST_CASE("euler identity on the half-plane is exact up to FD error") {
    ConeSpec spec(2, Sector{kPi});
    auto res = euler_identity_check(spec, {{1.0, 1.0}}, 1e-5);
    CHECK(res.rejected_samples == 0);
    CHECK(res.max_residual <= 1e-10);
}

TEST_CASE("euler identity across a random polygon-cone sample set") {
    ConeSpec spec(3, octant_triangle());
    Rng rng(42);
    std::vector<std::vector<double>> samples;
    while (samples.size() < 100) {
        std::vector<double> x = {rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0),
                                 rng.uniform(0.2, 2.0)};
        if (contains_direction(spec, x, 0.05)) samples.push_back(x);
    }
    auto res = euler_identity_check(spec, samples, 1e-5);
    // ridge-adjacent samples may be skipped; the rest satisfy the identity
    CHECK(res.rejected_samples < samples.size() / 2);
    CHECK(res.max_residual <= 1e-6);
}

TEST_CASE("euler check flags ridge-adjacent samples") {
    ConeSpec spec(2, Sector{3 * kPi / 2});
    // the bisector of a reflex sector is the ridge: nearest boundary point
    // flips between the two rays
    double th = 3 * kPi / 4;
    auto res = euler_identity_check(spec, {{std::cos(th), std::sin(th)}}, 1e-5);
    CHECK(res.rejected_samples == 1);
}

TEST_CASE("region grid reproduces closed-form volumes") {
    ConeSpec sec(2, Sector{kPi / 2});
    TruncatedRegion ann = TruncatedRegion::annulus(1.0);
    auto g = sample_region_grid(sec, ann, 64, 64);
    double want = (kPi / 2) * (4.0 - 0.25) / 2.0; // alpha (r_max^2 - r_min^2)/2
    CHECK(g.total_weight == doctest::Approx(want).epsilon(1e-10));

    ConeSpec cap(3, Cap{kPi / 2});
    auto gc = sample_region_grid(cap, ann, 64, 64);
    double solid = 2.0 * kPi * (1.0 - std::cos(kPi / 2));
    double wantc = solid * (8.0 - 0.125) / 3.0;
    CHECK(gc.total_weight == doctest::Approx(wantc).epsilon(1e-10));

    // refinement doubling leaves the weight total unchanged
    auto g2 = sample_region_grid(sec, ann, 128, 128);
    CHECK(std::fabs(g2.total_weight - g.total_weight) <= 1e-12 * g.total_weight);

    CHECK_THROWS(sample_region_grid(sec, ann, 2, 64));
    CHECK_THROWS(TruncatedRegion(1.0, 0.5, RegionKind::Annulus));
}

TEST_CASE("cross-section areas") {
    CHECK(cross_section_area(ConeSpec(2, Sector{1.3})) == doctest::Approx(1.3));
    CHECK(cross_section_area(ConeSpec(3, Cap{kPi / 2})) ==
          doctest::Approx(2.0 * kPi).epsilon(1e-12));
    // n = 4 hemisphere: half of |S^3| = pi^2
    CHECK(cross_section_area(ConeSpec(4, Cap{kPi / 2})) ==
          doctest::Approx(kPi * kPi).epsilon(1e-12));
}
