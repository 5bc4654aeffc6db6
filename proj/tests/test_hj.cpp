// Hamilton-Jacobi engine: the generalized HJ identity
//     (W')^2/2m + V - E = -(hbar^2/4m) <W; x>,
// conjugate momentum p = W', Jacobi-theorem times t = dW/dE and transverse
// positions y = -(1/hbar) dW/dky, and trajectory sampling.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "qhj/hj.hpp"
#include "qhj/observables.hpp"

using namespace qhj;

TEST_CASE("generalized HJ residual vanishes for closed-form samples") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        BarrierScenario scen;
        scen.U = 1.0 + 4.0 * (u(rng) + 1.0);
        scen.Ex = scen.U * (0.15 + 0.35 * (u(rng) + 1.0));
        const Wavenumbers wn = derive_wavenumbers(scen);
        const double a = std::exp(u(rng)), b = std::exp(u(rng));
        const Microstate ms{a, b, 1.7 * std::sqrt(a * b) * u(rng)};
        const double x = u(rng) < 0.0 ? -4.0 * (u(rng) + 1.5) : 2.0 * (u(rng) + 1.01) / wn.kappa;
        const BasisSample s = eval_basis_barrier(x, wn, ms, scen.units);
        const double res = hj_residual(s, ms, scen.units, potential(x, scen), scen.Ex);
        CHECK(std::abs(res) < 1e-10 * scen.Ex);
    }
}

TEST_CASE("HJ residual detects a denormalized pair") {
    // Scaling both fields by lambda breaks the Wronskian normalization the
    // quantum term requires; the residual must light up, not stay silent.
    BarrierScenario scen;
    scen.U = 2.0;
    scen.Ex = 1.0;
    const Wavenumbers wn = derive_wavenumbers(scen);
    const Microstate ms{1.1, 0.9, 0.3};
    BasisSample s = eval_basis_barrier(-1.3, wn, ms, scen.units);
    const double lambda = 1.05;
    s.phi *= lambda;
    s.theta *= lambda;
    s.dphi *= lambda;
    s.dtheta *= lambda;
    const double res = hj_residual(s, ms, scen.units, potential(-1.3, scen), scen.Ex);
    CHECK(std::abs(res) > 1e-3 * scen.Ex);
}

TEST_CASE("conjugate momentum: interior plateau and exact tail underflow") {
    BarrierScenario scen;
    scen.U = 2.0;
    scen.Ex = 1.0;
    const Wavenumbers wn = derive_wavenumbers(scen);
    const UnitSystem un;

    SUBCASE("a = b, c = 0 keeps |p| = hbar kx on the incident side") {
        const Microstate ms{1.0, 1.0, 0.0};
        for (double x : {-9.4, -2.0, -0.1})
            CHECK(conjugate_momentum(x, wn, ms, un) ==
                  doctest::Approx(un.hbar * wn.kx).epsilon(1e-14));
    }
    SUBCASE("deep tail underflows to exactly +0.0") {
        const Microstate ms{1.3, 0.8, 0.4};
        const double p = conjugate_momentum(900.0, wn, ms, un);
        CHECK(p == 0.0);
        CHECK_FALSE(std::signbit(p));
    }
    SUBCASE("momentum is everywhere positive before underflow") {
        const Microstate ms{1.3, 0.8, -0.9};
        for (double x : {-12.0, -0.5, 0.0, 0.5, 4.0, 40.0})
            CHECK(conjugate_momentum(x, wn, ms, un) > 0.0);
    }
}

TEST_CASE("Hamilton characteristic function is strictly monotone") {
    // W = integral of p > 0: any unwrapping slip of the arctan would show up
    // as a pi-sized jump backwards across branch points.
    BarrierScenario scen;
    scen.U = 2.3;
    scen.Ex = 1.9;
    const Wavenumbers wn = derive_wavenumbers(scen);
    const Microstate ms{2.2, 0.45, 1.1};
    const UnitSystem un;
    double prev = hamilton_characteristic(-40.0, wn, ms, un);
    for (int i = 1; i <= 400; ++i) {
        const double x = -40.0 + 45.0 * i / 400.0;
        const double W = hamilton_characteristic(x, wn, ms, un);
        CHECK(W > prev);
        prev = W;
    }
}

TEST_CASE("W increments match the momentum quadrature") {
    BarrierScenario scen;
    scen.U = 4.0;
    scen.Ex = 2.5;
    const Wavenumbers wn = derive_wavenumbers(scen);
    const Microstate ms{1.3, 0.8, 0.4};
    const UnitSystem un;
    // trapezoid refinement of integral p dx over [-2, 1]
    const int n = 20000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x0 = -2.0 + 3.0 * i / n, x1 = -2.0 + 3.0 * (i + 1) / n;
        acc += 0.5 * (conjugate_momentum(x0, wn, ms, un) + conjugate_momentum(x1, wn, ms, un)) *
               (x1 - x0);
    }
    const double dW = hamilton_characteristic(1.0, wn, ms, un) -
                      hamilton_characteristic(-2.0, wn, ms, un);
    CHECK(dW == doctest::Approx(acc).epsilon(1e-7));
}

TEST_CASE("Jacobi time of flight saturates to the reflection time") {
    BarrierScenario scen;
    scen.U = 2.0;
    scen.Ex = 1.0;
    const Microstate ms{1.0, 1.0, 0.0};
    const Wavenumbers wn = derive_wavenumbers(scen);
    const double tR = reflection_time(scen, ms);
    const double sat = 20.0 / wn.kappa;
    const double tj = 2.0 * (trajectory_time(sat, scen, ms) - trajectory_time(0.0, scen, ms));
    CHECK(tj == doctest::Approx(tR).epsilon(1e-6));
}

TEST_CASE("oblique transverse displacement saturates to the GH shift") {
    ObliqueScenario scen;
    scen.U = 3.0;
    scen.E = 2.0;
    scen.ky = 1.0;
    const Microstate ms{1.3, 0.8, 0.4};
    const Wavenumbers wn = derive_wavenumbers(scen);
    const double dy = gh_displacement(scen, ms);
    const double sat = 20.0 / wn.kappa;
    const double yj = 2.0 * (trajectory_y(sat, scen, ms) - trajectory_y(0.0, scen, ms));
    CHECK(yj == doctest::Approx(dy).epsilon(1e-5));
}

TEST_CASE("well times: antisymmetric for c = 0, libration via tail anchors") {
    const WellScenario ws{12.0, 1.0, 1, {}};
    const BoundLevel lv = solve_level(ws);

    SUBCASE("c = 0 makes t(x) odd") {
        const Microstate ms{1.7, 0.7, 0.0};
        CHECK(trajectory_time(0.0, ws, lv, ms) == 0.0);
        for (double x : {0.4, 1.0, 1.8}) {
            const double tp = trajectory_time(x, ws, lv, ms);
            const double tm = trajectory_time(-x, ws, lv, ms);
            CHECK(tm == doctest::Approx(-tp).epsilon(1e-9));
        }
    }
    SUBCASE("2[t(X) - t(-X)] converges to the libration period") {
        const Microstate ms{1.3, 0.8, 0.4};
        const double lib = libration_period(lv, ms);
        const double X = ws.q + 20.0 / lv.kappa;
        const double libj =
            2.0 * (trajectory_time(X, ws, lv, ms) - trajectory_time(-X, ws, lv, ms));
        CHECK(libj == doctest::Approx(lib).epsilon(1e-6));
    }
}

TEST_CASE("duct displacements saturate to the closed forms") {
    const DuctScenario ds{{12.0, 1.0, 1, {}}, 0.7};
    const BoundLevel lv = solve_level(ds.well);
    const Microstate ms{1.3, 0.8, 0.4};
    const DuctDisplacements dy = gh_displacements_duct(ds, lv, ms);
    const double X = ds.well.q + 20.0 / lv.kappa;
    const double yp = 2.0 * (trajectory_y(X, ds, lv, ms) - trajectory_y(ds.well.q, ds, lv, ms));
    const double ym =
        -2.0 * (trajectory_y(-X, ds, lv, ms) - trajectory_y(-ds.well.q, ds, lv, ms));
    CHECK(yp == doctest::Approx(dy.dy_plus).epsilon(1e-5));
    CHECK(ym == doctest::Approx(dy.dy_minus).epsilon(1e-5));
}

TEST_CASE("Richardson derivative nails analytic functions") {
    const double d1 = detail::richardson_derivative([](double t) { return std::sin(t); }, 0.3, 0.05);
    CHECK(d1 == doctest::Approx(std::cos(0.3)).epsilon(1e-11));
    const double d2 =
        detail::richardson_derivative([](double t) { return std::exp(2.0 * t); }, -0.7, 0.04);
    CHECK(d2 == doctest::Approx(2.0 * std::exp(-1.4)).epsilon(1e-11));
}

TEST_CASE("trajectory sampling: anchors, sign convention, validation") {
    ObliqueScenario scen;
    scen.U = 3.0;
    scen.E = 2.0;
    scen.ky = 1.0;
    const Microstate ms{1.3, 0.8, 0.4};
    const std::vector<double> grid{-3.0, -1.0, 0.0, 1.0, 2.5};

    const auto fwd = sample_trajectory(grid, scen, ms);
    REQUIRE(fwd.size() == grid.size());
    // the x = 0 row is the reference point for both t and y
    CHECK(fwd[2].t_rel == 0.0);
    CHECK(fwd[2].y_rel == 0.0);
    CHECK_FALSE(std::signbit(fwd[2].t_rel));
    CHECK_FALSE(std::signbit(fwd[2].y_rel));
    // time increases along the trajectory
    for (std::size_t i = 1; i < fwd.size(); ++i) CHECK(fwd[i].t_rel > fwd[i - 1].t_rel);

    const auto bwd = sample_trajectory(grid, scen, ms, -1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(bwd[i].t_rel == doctest::Approx(-fwd[i].t_rel).epsilon(1e-14));
        CHECK(bwd[i].y_rel == doctest::Approx(-fwd[i].y_rel).epsilon(1e-14));
        CHECK(bwd[i].p == doctest::Approx(-fwd[i].p).epsilon(1e-14));
        CHECK(bwd[i].W == doctest::Approx(fwd[i].W).epsilon(1e-14));  // W is sigma-free
    }

    CHECK_THROWS_AS(sample_trajectory({1.0, 1.0}, scen, ms), std::invalid_argument);
    CHECK_THROWS_AS(sample_trajectory({2.0, 1.0}, scen, ms), std::invalid_argument);
    CHECK_THROWS_AS(sample_trajectory(grid, scen, ms, 2), std::invalid_argument);
}
