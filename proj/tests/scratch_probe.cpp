// scratch driver (not part of the build): probes convergence behavior
#include <cstdio>
#include <functional>
#include <numbers>

#include "conehardy/spectral.hpp"

using namespace conehardy;
constexpr double kPi = std::numbers::pi;

static void section(const char* name, const std::function<void()>& body) {
    std::printf("=== %s ===\n", name);
    std::fflush(stdout);
    try {
        body();
    } catch (const std::exception& e) {
        std::printf("  FAILED: %s\n", e.what());
    }
    std::fflush(stdout);
}

int main() {
    ConeSpec half_plane(2, Sector{kPi});
    ConeSpec hemi(3, Cap{kPi / 2});

    section("boundary-log sigma(1/4) half-plane (want 0.25)", [&] {
        for (double X : {30.0, 60.0, 120.0, 240.0, 480.0}) {
            SolveOptions o;
            o.scheme = Scheme::BoundaryLog;
            o.base_logspan = X;
            auto r = sigma_of_mu(half_plane, 0.25, 2, o);
            std::printf("  X=%5.0f lev0=%.8f lev1=%.8f extrap=%.8f err=%+.2e res=%.1e\n", X,
                        r.levels[0].sigma, r.levels[1].sigma, r.sigma, r.sigma - 0.25,
                        r.residual_norm);
        }
        SolveOptions o;
        o.scheme = Scheme::BoundaryLog;
        o.base_logspan = 60;
        auto r = sigma_of_mu(half_plane, 0.25, 4, o);
        std::printf("  4-level: sigma=%.8f err=%+.2e order=%.2f\n", r.sigma, r.sigma - 0.25,
                    r.measured_order);
    });

    section("boundary-log sigma(0) half-plane (want 1)", [&] {
        SolveOptions o;
        o.scheme = Scheme::BoundaryLog;
        auto r = sigma_of_mu(half_plane, 0.0, 3, o);
        std::printf("  sigma=%.10f err=%+.2e\n", r.sigma, r.sigma - 1.0);
    });

    section("boundary-log hemisphere mu=1/4 (want 0.75)", [&] {
        SolveOptions o;
        o.scheme = Scheme::BoundaryLog;
        auto r = sigma_of_mu(hemi, 0.25, 4, o);
        std::printf("  sigma=%.8f err=%+.2e order=%.2f\n", r.sigma, r.sigma - 0.75,
                    r.measured_order);
        auto r0 = sigma_of_mu(hemi, 0.0, 3, o);
        std::printf("  mu=0: sigma=%.10f err=%+.2e (want 2)\n", r0.sigma, r0.sigma - 2.0);
    });

    section("boundary-log n=4 hemisphere mu=0 (want 3)", [&] {
        ConeSpec h4(4, Cap{kPi / 2});
        SolveOptions o;
        o.scheme = Scheme::BoundaryLog;
        auto r = sigma_of_mu(h4, 0.0, 3, o);
        std::printf("  sigma=%.8f err=%+.2e\n", r.sigma, r.sigma - 3.0);
    });

    section("mu0 half-plane / hemisphere via boundary-log (want 0.25)", [&] {
        SolveOptions o;
        o.scheme = Scheme::BoundaryLog;
        auto m1 = mu0_compute(half_plane, 3, o);
        std::printf("  half-plane mu0=%.8f raw=%.8f err=%+.2e clamp=%d\n", m1.mu0, m1.mu0_raw,
                    m1.mu0_raw - 0.25, m1.clamped);
        auto m2 = mu0_compute(hemi, 3, o);
        std::printf("  hemisphere mu0=%.8f raw=%.8f err=%+.2e clamp=%d\n", m2.mu0, m2.mu0_raw,
                    m2.mu0_raw - 0.25, m2.clamped);
    });

    section("mu0 sector 3pi/2 via boundary-log", [&] {
        ConeSpec nc(2, Sector{3 * kPi / 2});
        SolveOptions o;
        o.scheme = Scheme::BoundaryLog;
        auto m = mu0_compute(nc, 3, o);
        std::printf("  mu0=%.8f raw=%.8f bis=%.8f gap=%.2e flag=%d\n", m.mu0, m.mu0_raw,
                    m.mu0_bisection.value_or(-1.0), m.cross_check_gap, m.flagged);
        auto s = sigma_of_mu(nc, m.mu0, 3, o);
        std::printf("  sigma(mu0)=%.3e  [lambda(mu0) for n=2]\n", s.sigma);
    });

    section("direct scheme sanity at mu=0 (sector pi/2, want 4 to 1e-5)", [&] {
        ConeSpec q(2, Sector{kPi / 2});
        SolveOptions o;
        o.base_nodes = 1024;
        auto r = sigma_of_mu(q, 0.0, 3, o);
        std::printf("  sigma=%.10f err=%+.2e order=%.2f res=%.1e\n", r.sigma, r.sigma - 4.0,
                    r.measured_order, r.residual_norm);
    });

    section("divergence mu=0.3 half-plane, grading sweep", [&] {
        for (double g : {1.0, 2.0, 3.0}) {
            auto rep = divergence_diagnostic(half_plane, 0.3, 7, 256, g);
            std::printf("  g=%.1f:", g);
            for (auto& l : rep.levels) std::printf(" %.3g", l.sigma);
            std::printf("  dec=%d div=%d\n", rep.strictly_decreasing, rep.divergent);
        }
    });

    section("divergence contrast mu=0.25", [&] {
        auto rep = divergence_diagnostic(half_plane, 0.25, 5, 256, 2.0);
        for (auto& l : rep.levels) std::printf(" %.6f", l.sigma);
        std::printf("  dec=%d div=%d\n", rep.strictly_decreasing, rep.divergent);
    });

    section("octant FEM mu=0 (expect 12)", [&] {
        ConeSpec oct(3, SphericalPolygon{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
        for (double h : {0.2, 0.1, 0.05}) {
            auto op = assemble_polygon(oct, 0.0, h);
            auto r = principal_eigenpair(op);
            std::printf("  h=%.3f dofs=%zu sigma=%.6f res=%.1e sigma2=%.3f\n", h, op.size(),
                        r.sigma, r.residual_norm, r.sigma2);
        }
        SolveOptions o;
        o.polygon_h = 0.1;
        auto r = sigma_of_mu(oct, 0.0, 3, o);
        std::printf("  extrapolated sigma=%.6f order=%.2f\n", r.sigma, r.measured_order);
    });

    section("hemisphere as 64-gon FEM, mu=0 (expect ~2)", [&] {
        std::vector<std::array<double, 3>> vs;
        for (int k = 0; k < 64; ++k) {
            double t = 2.0 * kPi * k / 64;
            vs.push_back({std::cos(t), std::sin(t), 0.0});
        }
        ConeSpec gon(3, SphericalPolygon{vs});
        auto op = assemble_polygon(gon, 0.0, 0.1);
        auto r = principal_eigenpair(op);
        std::printf("  dofs=%zu sigma=%.6f res=%.1e\n", op.size(), r.sigma, r.residual_norm);
    });

    section("exhaustion sector pi mu=0", [&] {
        auto vals = exhaustion_monotonicity(half_plane, 0.0, {0.5, 0.75, 0.9, 0.99}, 2048);
        for (std::size_t i = 0; i < vals.size(); ++i) std::printf(" %.6f", vals[i]);
        std::printf("  (exact: 4, 1.7778, 1.2346, 1.0203)\n");
    });

    section("agmon collar", [&] {
        auto a1 = agmon_supersolution_check(hemi, 1.0, 0.05);
        std::printf("  cap: c_max=%.6f min=%.3e\n", a1.c_max, a1.min_value);
        auto a2 = agmon_supersolution_check(half_plane, 1.0, 0.05);
        std::printf("  sector: c_max=%.6f min=%.3e\n", a2.c_max, a2.min_value);
    });

    section("concavity of discrete sigma(mu) on fixed grid", [&] {
        ConeSpec nc(2, Sector{3 * kPi / 2});
        SolveOptions o;
        o.scheme = Scheme::BoundaryLog;
        auto m = mu0_compute(nc, 2, o);
        double mu_hi = m.mu0;
        int G = 20;
        std::vector<double> sig(G);
        for (int i = 0; i < G; ++i) {
            double mu = -1.0 + (mu_hi + 1.0) * i / (G - 1);
            auto op = assemble_sector(nc, mu, 2048, 1.0);
            sig[static_cast<std::size_t>(i)] = principal_eigenpair(op).sigma;
        }
        double worst = -1e300;
        bool noninc = true;
        for (int i = 1; i < G; ++i) {
            if (sig[i] > sig[i - 1] + 1e-12) noninc = false;
            if (i + 1 < G) worst = std::max(worst, sig[i - 1] - 2.0 * sig[i] + sig[i + 1]);
        }
        std::printf("  nonincreasing=%d, max second difference=%.2e (want <= 1e-10)\n", noninc,
                    worst);
    });
    return 0;
}
