// Closed-form observables and the constants-of-motion algebra:
//     t_R   = 2 D (1 + r^2) m / (S+ hbar kappa kx),      r = kappa/kx,
//     dy    = t_R hbar ky / m,
//     t+-R  = 2 D (1 + r^2) m / (S+- hbar kappa kx),     S+- = a +- c r + b r^2,
//     t_cross = 2 D (1 + r^2) q m (a + b r^2) / (hbar kx DEN),
//     t_Lib = t+R + t-R + 2 t_cross,
// the Ermakov invariant I = b / (ab - c^2/4), the Wronskian normalization
// W^2 = 2m / (hbar^2 (ab - c^2/4)), wavefunction reconstruction, the plane
// wave split, and recovery of (a, b, c) from measured constants.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "qhj/observables.hpp"

using namespace qhj;

TEST_CASE("special-case reflection time is exactly unity") {
    // hbar = m = 1, U = 2, Ex = 1: t_R = hbar / sqrt(Ex (U - Ex)) = 1 for any
    // a = b, c = 0 microstate.
    BarrierScenario scen;
    scen.U = 2.0;
    scen.Ex = 1.0;
    for (double s : {1.0, 0.31, 2.7})
        CHECK(reflection_time(scen, {s, s, 0.0}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("reflection time responds to the microstate") {
    BarrierScenario scen;
    scen.U = 2.0;
    scen.Ex = 1.0;
    const Wavenumbers wn = derive_wavenumbers(scen);
    const double r = wn.kappa / wn.kx;  // = 1 here
    const Microstate ms{1.3, 0.8, 0.4};
    const double D = std::sqrt(microstate_margin(ms));
    const double expected = 2.0 * D * (1.0 + r * r) / ((ms.a + ms.c * r + ms.b * r * r) *
                                                       wn.kappa * wn.kx);
    CHECK(reflection_time(scen, ms) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("GH displacement equals t_R hbar ky / m") {
    ObliqueScenario scen;
    scen.U = 3.0;
    scen.E = 2.0;
    scen.ky = 1.0;
    const Microstate iso{1.0, 1.0, 0.0};
    // flagship value: kx = kappa = sqrt(3), t_R = 2/3, dy = 2/3
    CHECK(gh_displacement(scen, iso) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    const Microstate ms{1.3, 0.8, 0.4};
    CHECK(gh_displacement(scen, ms) ==
          doctest::Approx(reflection_time(scen, ms) * scen.ky).epsilon(1e-14));
}

TEST_CASE("well tail times: ordering and the libration assembly identity") {
    const BoundLevel lv = solve_level(12.0, 1.0, 1);

    SUBCASE("c > 0 shortens the + tail dwell, c = 0 balances both") {
        const WellReflectionTimes asym = reflection_times_well(lv, {1.3, 0.8, 0.4});
        CHECK(asym.t_plus < asym.t_minus);
        const WellReflectionTimes sym = reflection_times_well(lv, {1.3, 0.8, 0.0});
        CHECK(sym.t_plus == doctest::Approx(sym.t_minus).epsilon(1e-15));
        // flipping the sign of c swaps the two tails
        const WellReflectionTimes flip = reflection_times_well(lv, {1.3, 0.8, -0.4});
        CHECK(flip.t_plus == doctest::Approx(asym.t_minus).epsilon(1e-14));
        CHECK(flip.t_minus == doctest::Approx(asym.t_plus).epsilon(1e-14));
    }

    SUBCASE("t_Lib = t+ + t- + 2 t_cross exactly") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            const double a = std::exp(u(rng)), b = std::exp(u(rng));
            const Microstate ms{a, b, 1.8 * std::sqrt(a * b) * u(rng)};
            const WellReflectionTimes t = reflection_times_well(lv, ms);
            const double cross = interior_crossing_time(lv, ms);
            const double lib = libration_period(lv, ms);
            CHECK(lib == doctest::Approx(t.t_plus + t.t_minus + 2.0 * cross).epsilon(1e-13));
        }
    }
}

TEST_CASE("duct displacements are the tail times scaled by hbar ky / m") {
    const DuctScenario ds{{12.0, 1.0, 1, {}}, 0.7};
    const BoundLevel lv = solve_level(ds.well);
    const Microstate ms{1.3, 0.8, 0.4};
    const WellReflectionTimes t = reflection_times_well(lv, ms);
    const DuctDisplacements dy = gh_displacements_duct(ds, lv, ms);
    CHECK(dy.dy_plus == doctest::Approx(t.t_plus * ds.ky).epsilon(1e-14));
    CHECK(dy.dy_minus == doctest::Approx(t.t_minus * ds.ky).epsilon(1e-14));
    CHECK(libration_displacement(ds, lv, ms) ==
          doctest::Approx(libration_period(lv, ms) * ds.ky).epsilon(1e-14));
}

TEST_CASE("Ermakov invariant: closed form and pointwise constancy") {
    CHECK(ermakov_invariant({2.0, 1.0, 1.0}) == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
    CHECK(wronskian_sq({2.0, 1.0, 1.0}, {}) == doctest::Approx(2.0 / 1.75).epsilon(1e-15));

    BarrierScenario scen;
    scen.U = 3.3;
    scen.Ex = 1.4;
    const Wavenumbers wn = derive_wavenumbers(scen);
    const Microstate ms{1.3, 0.8, -0.6};
    const double I = ermakov_invariant(ms);
    for (double x : {-6.2, -1.0, 0.0, 0.8, 3.0}) {
        const BasisSample s = eval_basis_barrier(x, wn, ms, scen.units);
        CHECK(pointwise_ermakov(s, ms, scen.units) == doctest::Approx(I).epsilon(1e-12));
    }
}

TEST_CASE("wavefunction reconstruction collapses to phi") {
    BarrierScenario scen;
    scen.U = 2.0;
    scen.Ex = 1.0;
    const Wavenumbers wn = derive_wavenumbers(scen);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = std::exp(u(rng)), b = std::exp(u(rng));
        const Microstate ms{a, b, 1.8 * std::sqrt(a * b) * u(rng)};
        for (double x : {-3.7, -0.2, 1.1}) {
            const BasisSample s = eval_basis_barrier(x, wn, ms, scen.units);
            CHECK(reconstruct_wavefunction(s, ms) == doctest::Approx(s.phi).epsilon(1e-12));
        }
    }
}

TEST_CASE("plane-wave split sums to phi and scales homogeneously") {
    BarrierScenario scen;
    scen.U = 2.0;
    scen.Ex = 1.0;
    const Wavenumbers wn = derive_wavenumbers(scen);
    const Microstate ms{1.3, 0.8, 0.4};
    for (double x : {-2.4, -0.6, 0.9, 2.5}) {
        const BasisSample s = eval_basis_barrier(x, wn, ms, scen.units);
        const auto [zp, zm] = decompose_waves(s, ms);
        CHECK(std::abs(zp + zm - s.phi) < 1e-13 * std::abs(s.phi));
        // opposite waves conjugate: zm = conj(zp) for real phi, theta
        CHECK(std::abs(zm - std::conj(zp)) < 1e-13 * std::abs(zp));
        // linearity in the fields
        BasisSample sc = s;
        const double lam = 3.7;
        sc.phi *= lam;
        sc.theta *= lam;
        sc.dphi *= lam;
        sc.dtheta *= lam;
        const auto [wp, wm] = decompose_waves(sc, ms);
        CHECK(std::abs(wp - lam * zp) < 1e-13 * std::abs(lam * zp));
        CHECK(std::abs(wm - lam * zm) < 1e-13 * std::abs(lam * zm));
    }
}

TEST_CASE("observables are homogeneous under microstate scaling") {
    // (a,b,c) -> lambda (a,b,c): times and displacements are degree 0; the
    // margin ab - c^2/4 is quadratic, so W^2 = 2m/(hbar^2 margin) is degree
    // -2 while I = b/margin is degree -1.
    const DuctScenario ds{{12.0, 1.0, 0, {}}, 0.7};
    const BoundLevel lv = solve_level(ds.well);
    const Microstate ms{1.3, 0.8, 0.4};
    const double lam = 2.9;
    const Microstate scaled{lam * ms.a, lam * ms.b, lam * ms.c};
    const MotionConstants base = motion_constants(ds, lv, ms);
    const MotionConstants up = motion_constants(ds, lv, scaled);
    CHECK(up.t_plus == doctest::Approx(base.t_plus).epsilon(1e-12));
    CHECK(up.t_minus == doctest::Approx(base.t_minus).epsilon(1e-12));
    CHECK(up.t_libration == doctest::Approx(base.t_libration).epsilon(1e-12));
    CHECK(up.dy_plus == doctest::Approx(base.dy_plus).epsilon(1e-12));
    CHECK(up.dy_minus == doctest::Approx(base.dy_minus).epsilon(1e-12));
    CHECK(up.dy_libration == doctest::Approx(base.dy_libration).epsilon(1e-12));
    CHECK(up.action == doctest::Approx(base.action).epsilon(1e-12));
    CHECK(up.energy == doctest::Approx(base.energy).epsilon(1e-12));
    CHECK(up.w_squared == doctest::Approx(base.w_squared / (lam * lam)).epsilon(1e-12));
    CHECK(up.ermakov == doctest::Approx(base.ermakov / lam).epsilon(1e-12));
}

TEST_CASE("coefficient recovery round trip") {
    const DuctScenario ds{{2.0, 1.0, 0, {}}, 0.7};
    const BoundLevel lv = solve_level(ds.well);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = std::exp(u(rng)), b = std::exp(u(rng));
        const Microstate ms{a, b, 1.8 * std::sqrt(a * b) * u(rng)};
        const MotionConstants mc = motion_constants(ds, lv, ms);
        const Microstate rec = recover_coefficients(mc, ds, lv);
        CHECK(rec.a == doctest::Approx(ms.a).epsilon(1e-11));
        CHECK(rec.b == doctest::Approx(ms.b).epsilon(1e-11));
        CHECK(std::abs(rec.c - ms.c) < 1e-11 * std::sqrt(ms.a * ms.b));
    }
}

TEST_CASE("recovery needs a transverse component") {
    const DuctScenario ds{{2.0, 1.0, 0, {}}, 0.0};
    const BoundLevel lv = solve_level(ds.well);
    const MotionConstants mc = motion_constants(ds, lv, {1.3, 0.8, 0.4});
    CHECK_THROWS_AS(recover_coefficients(mc, ds, lv), std::invalid_argument);
}

TEST_CASE("overdetermination check accepts clean records and flags tampering") {
    const DuctScenario ds{{2.0, 1.0, 0, {}}, 0.7};
    const BoundLevel lv = solve_level(ds.well);
    const Microstate ms{1.3, 0.8, 0.4};
    const MotionConstants mc = motion_constants(ds, lv, ms);

    const OverdeterminationReport clean = overdetermination_check(mc, ds, 1e-6);
    CHECK(clean.consistent);
    CHECK(clean.rel_discrepancy < 1e-12);
    CHECK(clean.predicted_dy_libration == doctest::Approx(mc.dy_libration).epsilon(1e-12));

    MotionConstants bad = mc;
    bad.dy_minus *= 1.01;
    const OverdeterminationReport flagged = overdetermination_check(bad, ds, 1e-3);
    CHECK_FALSE(flagged.consistent);
    CHECK(flagged.rel_discrepancy > 1e-3);

    MotionConstants degenerate = mc;
    degenerate.w_squared = -1.0;
    const OverdeterminationReport broken = overdetermination_check(degenerate, ds, 1e-3);
    CHECK_FALSE(broken.consistent);
}
