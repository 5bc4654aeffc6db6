#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "qhj/basis.hpp"
#include "qhj/core.hpp"
#include "qhj/hj.hpp"
#include "qhj/observables.hpp"
#include "qhj/quantization.hpp"

/// Independent numerical oracles and the self-verification suite: adaptive
/// Runge-Kutta integration of the wave equation against the closed-form
/// basis, finite-difference Schwarzians, quadrature reflection/libration
/// times, and finite-difference interface probes that are deliberately
/// sensitive to faults the analytic identities cannot see.
namespace qhj {

/// Outcome of one verification check.
struct CheckResult {
    std::string name;
    double tolerance = 0.0;
    double measured = 0.0;
    bool pass = false;
};

/// Configuration of run_verification. The misprint injection replaces the
/// well theta tail with a wrong-anchor decaying term; the suite must then
/// fail its interface checks, demonstrating they have teeth.
struct VerifyOptions {
    std::uint64_t seed = 0x51a7eULL;
    int scenario_count = 6;
    bool inject_theta_misprint = false;
};

namespace oracle {

using OdeState = std::array<double, 4>;  // phi, phi', theta, theta'

/// Integrate phi'' = g phi (and theta alike) with an adaptive RKF78 stepper
/// outward in both directions from a seed that sits on one of the grid
/// points, restarting at each breakpoint so no step straddles a potential
/// discontinuity; g is constant per region for the potentials treated here,
/// so each piece passes its own constant. Outward integration keeps every
/// leg running into its locally growing mode, which is what keeps the
/// comparison conditioned in the evanescent tails.
inline std::vector<BasisSample> ode_basis(const std::vector<double>& grid,
                                          const std::function<double(double)>& region_g,
                                          const std::vector<double>& breakpoints,
                                          const BasisSample& seed, double rtol = 1e-12,
                                          double atol = 1e-14) {
    namespace odeint = boost::numeric::odeint;
    if (grid.size() < 2) throw std::invalid_argument("ode_basis: grid needs at least two points");
    std::size_t i0 = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("ode_basis: grid must be strictly increasing");
        if (grid[i] == seed.x) i0 = i;
    }
    if (i0 == grid.size())
        throw std::invalid_argument("ode_basis: seed must sit on a grid point");
    std::vector<BasisSample> out(grid.size());
    out[i0] = seed;
    using stepper_t = odeint::runge_kutta_fehlberg78<OdeState>;
    const auto run = [&](bool rightward) {
        OdeState s{seed.phi, seed.dphi, seed.theta, seed.dtheta};
        auto ctrl = odeint::make_controlled(atol, rtol, stepper_t());
        const auto advance_piece = [&](double a, double b) {
            if (a == b) return;
            const double g = region_g(0.5 * (a + b));
            const auto sys = [g](const OdeState& y, OdeState& dy, double) {
                dy[0] = y[1];
                dy[1] = g * y[0];
                dy[2] = y[3];
                dy[3] = g * y[2];
            };
            odeint::integrate_adaptive(ctrl, sys, s, a, b, 0.05 * (b - a));
        };
        std::size_t i = i0;
        while (rightward ? i + 1 < grid.size() : i > 0) {
            const std::size_t j = rightward ? i + 1 : i - 1;
            double a = grid[i];
            const double b = grid[j];
            std::vector<double> cuts;
            for (double w : breakpoints)
                if ((w - a) * (b - w) > 0.0) cuts.push_back(w);
            std::sort(cuts.begin(), cuts.end());
            if (!rightward) std::reverse(cuts.begin(), cuts.end());
            for (double w : cuts) {
                advance_piece(a, w);
                a = w;
            }
            advance_piece(a, b);
            BasisSample smp;
            smp.x = b;
            smp.phi = s[0];
            smp.dphi = s[1];
            smp.theta = s[2];
            smp.dtheta = s[3];
            out[j] = smp;
            i = j;
        }
    };
    run(true);
    run(false);
    return out;
}

/// Mixed-norm deviation between two samples: componentwise difference
/// (derivatives scaled by 1/kbar) over the larger local 4-vector norm.
inline double sample_deviation(const BasisSample& lhs, const BasisSample& rhs, double kbar) {
    const auto norm4 = [kbar](const BasisSample& s) {
        return std::max({std::abs(s.phi), std::abs(s.theta), std::abs(s.dphi) / kbar,
                         std::abs(s.dtheta) / kbar});
    };
    const double scale = std::max(norm4(lhs), norm4(rhs));
    const double dev = std::max({std::abs(lhs.phi - rhs.phi), std::abs(lhs.theta - rhs.theta),
                                 std::abs(lhs.dphi - rhs.dphi) / kbar,
                                 std::abs(lhs.dtheta - rhs.dtheta) / kbar});
    return dev / scale;
}

/// Max mixed-norm deviation of the closed-form barrier basis from the ODE
/// solution seeded at the deepest oscillatory grid point.
inline double basis_vs_ode_barrier(const BarrierScenario& scen, const Microstate& ms,
                                   int npts = 160) {
    const Wavenumbers wn = derive_wavenumbers(scen);
    const UnitSystem& un = scen.units;
    const double g_in = -wn.kx * wn.kx;    // x < 0
    const double g_out = wn.kappa * wn.kappa;  // x > 0
    const double lo = -6.0 * M_PI / wn.kx, hi = 10.0 / wn.kappa;
    std::vector<double> grid(static_cast<std::size_t>(npts));
    for (int i = 0; i < npts; ++i) grid[i] = lo + (hi - lo) * i / (npts - 1.0);
    const auto ode = ode_basis(
        grid, [&](double x) { return x < 0.0 ? g_in : g_out; }, {0.0},
        eval_basis_barrier(grid.front(), wn, ms, un));
    const double kbar = std::max(wn.kx, wn.kappa);
    double worst = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        worst = std::max(worst, sample_deviation(eval_basis_barrier(grid[i], wn, ms, un), ode[i], kbar));
    return worst;
}

/// Same for the well basis at a bound level, seeded at the well center
/// (where the closed form is elementary) and integrated outward through
/// both interfaces into both tails.
inline double basis_vs_ode_well(const WellScenario& scen, const Microstate& ms,
                                WellThetaForm form = WellThetaForm::continuation, int npts = 201) {
    const BoundLevel lv = solve_level(scen);
    const WellGeometry g = well_geometry(lv);
    const UnitSystem& un = scen.units;
    const double g_in = -g.kx * g.kx, g_out = g.kappa * g.kappa;
    const double span = 10.0 / g.kappa;
    npts |= 1;  // odd count puts a grid point exactly on x = 0
    const double hi = g.q + span, lo = -hi;
    std::vector<double> grid(static_cast<std::size_t>(npts));
    for (int i = 0; i < npts; ++i) grid[i] = lo + (hi - lo) * i / (npts - 1.0);
    const std::size_t mid = static_cast<std::size_t>(npts / 2);
    grid[mid] = 0.0;
    const auto ode = ode_basis(
        grid, [&](double x) { return std::abs(x) <= scen.q ? g_in : g_out; }, {-scen.q, scen.q},
        eval_basis_well(0.0, g, ms, un, form));
    const double kbar = std::max(g.kx, g.kappa);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i == mid) continue;
        worst = std::max(worst,
                         sample_deviation(eval_basis_well(grid[i], g, ms, un, form), ode[i], kbar));
    }
    return worst;
}

namespace detail_oracle {

/// Richardson tableau over central second differences.
template <class F>
inline double richardson_second_derivative(F&& f, double x0, double h0, double rel_tol = 1e-5) {
    constexpr int levels = 4;
    double tab[levels][levels];
    const double f0 = f(x0);
    double best = std::numeric_limits<double>::quiet_NaN();
    double best_err = std::numeric_limits<double>::infinity();
    for (int i = 0; i < levels; ++i) {
        const double h = h0 / static_cast<double>(1 << i);
        tab[i][0] = (f(x0 + h) - 2.0 * f0 + f(x0 - h)) / (h * h);
        for (int j = 1; j <= i; ++j) {
            const double w = static_cast<double>(1 << (2 * j)) - 1.0;
            tab[i][j] = tab[i][j - 1] + (tab[i][j - 1] - tab[i - 1][j - 1]) / w;
        }
        if (i > 0) {
            const double err = std::abs(tab[i][i] - tab[i - 1][i - 1]);
            if (err <= best_err) {
                best_err = err;
                best = tab[i][i];
            }
        }
    }
    const double scale = std::max(std::abs(best), 1e-3);
    if (!(best_err <= rel_tol * scale))
        throw std::runtime_error("richardson_second_derivative: no convergence at x0 = " +
                                 std::to_string(x0) + " with initial step " + std::to_string(h0));
    return best;
}

}  // namespace detail_oracle

/// Schwarzian of W from finite differences of the momentum p = W' alone:
///     {W; x} = p''/p - (3/2)(p'/p)^2.
template <class P>
inline double fd_schwarzian(P&& p, double x, double h0) {
    const double p0 = p(x);
    const double dp = qhj::detail::richardson_derivative(p, x, h0);
    const double ddp = detail_oracle::richardson_second_derivative(p, x, h0);
    const double ratio = dp / p0;
    return ddp / p0 - 1.5 * ratio * ratio;
}

namespace detail_oracle {

inline double kronrod(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-11);
}

/// Interior momentum of the off-shell well family at energy E:
///     p = hbar kx(E) D / (a cos^2 z + b sin^2 z + c sin z cos z), z = kx x.
inline double interior_momentum(double x, double E, double U, const Microstate& ms,
                                const UnitSystem& un) {
    const double kx = std::sqrt(2.0 * un.mass * (E + U)) / un.hbar;
    const double z = kx * x;
    const double co = std::cos(z), si = std::sin(z);
    const double qhat = ms.a * co * co + ms.b * si * si + ms.c * si * co;
    return un.hbar * kx * std::sqrt(microstate_margin(ms)) / qhat;
}

inline Wavenumbers well_offshell_wavenumbers(double E, double U, const UnitSystem& un) {
    return {std::sqrt(2.0 * un.mass * (E + U)) / un.hbar, std::sqrt(-2.0 * un.mass * E) / un.hbar};
}

}  // namespace detail_oracle

/// Reflection time by direct quadrature of the trajectory slowness,
///     t_R = 2 int_0^inf dp/dE dx,
/// with dp/dE by central differences of the scaled-tail momentum. Shares no
/// algebra with the closed-form observable.
inline double numeric_reflection_time(const BarrierScenario& scen, const Microstate& ms) {
    validate_scenario(scen);
    const UnitSystem& un = scen.units;
    const Wavenumbers wn = derive_wavenumbers(scen);
    const double hE = qhj::detail::fd_energy_step(scen.Ex, scen.U - scen.Ex, scen.U);
    const auto dpdE = [&](double x) {
        const auto pm = [&](double Ep) {
            const Wavenumbers w{std::sqrt(2.0 * un.mass * Ep) / un.hbar,
                                std::sqrt(2.0 * un.mass * (scen.U - Ep)) / un.hbar};
            return conjugate_momentum(x, w, ms, un);
        };
        return (pm(scen.Ex + hE) - pm(scen.Ex - hE)) / (2.0 * hE);
    };
    return 2.0 * detail_oracle::kronrod(dpdE, 0.0, 25.0 / wn.kappa);
}

/// Wall reflection times by the same quadrature through the anchored tail
/// family (sign of c selects the wall).
inline WellReflectionTimes numeric_reflection_times_well(const WellScenario& scen,
                                                         const BoundLevel& lv,
                                                         const Microstate& ms) {
    validate_scenario(scen);
    const UnitSystem& un = scen.units;
    const double E = bound_energy(lv, un);
    const double hE = qhj::detail::fd_energy_step(-E, E + scen.U, scen.U);
    const auto leg = [&](const Microstate& m2) {
        const auto dpdE = [&](double xi) {
            const auto pm = [&](double Ep) {
                return conjugate_momentum(xi, detail_oracle::well_offshell_wavenumbers(Ep, scen.U, un),
                                          m2, un);
            };
            return (pm(E + hE) - pm(E - hE)) / (2.0 * hE);
        };
        return 2.0 * detail_oracle::kronrod(dpdE, 0.0, 25.0 / lv.kappa);
    };
    const Microstate flipped{ms.a, ms.b, -ms.c};
    return {leg(ms), leg(flipped)};
}

/// Interior crossing time t(+q) - t(-q) by quadrature of the interior family.
inline double numeric_crossing_time(const WellScenario& scen, const BoundLevel& lv,
                                    const Microstate& ms) {
    validate_scenario(scen);
    const UnitSystem& un = scen.units;
    const double E = bound_energy(lv, un);
    const double hE = qhj::detail::fd_energy_step(-E, E + scen.U, scen.U);
    const auto dpdE = [&](double x) {
        return (detail_oracle::interior_momentum(x, E + hE, scen.U, ms, un) -
                detail_oracle::interior_momentum(x, E - hE, scen.U, ms, un)) /
               (2.0 * hE);
    };
    return detail_oracle::kronrod(dpdE, -scen.q, scen.q);
}

inline double numeric_libration_period(const WellScenario& scen, const BoundLevel& lv,
                                       const Microstate& ms) {
    const WellReflectionTimes t = numeric_reflection_times_well(scen, lv, ms);
    return t.t_plus + t.t_minus + 2.0 * numeric_crossing_time(scen, lv, ms);
}

/// Action variable by quadrature: J = 2 int p dx over one sweep, in three
/// pieces so the integrator never crosses a wall.
inline double action_quadrature(const BoundLevel& lv, const Microstate& ms,
                                const UnitSystem& units = {}, double pad = 45.0) {
    const WellGeometry g = well_geometry(lv);
    const double X = g.q + pad / g.kappa;
    const auto p = [&](double x) { return conjugate_momentum(x, g, ms, units); };
    return 2.0 * (detail_oracle::kronrod(p, -X, -g.q) + detail_oracle::kronrod(p, -g.q, g.q) +
                  detail_oracle::kronrod(p, g.q, X));
}

/// Wronskian from central finite differences of basis values alone, relative
/// to the exact constant. Unlike the analytic-derivative Wronskian, this
/// probe uses the value field on both sides of a stencil, so a value jump at
/// an interface (for example a wrongly anchored tail term) cannot cancel.
template <class Eval>
inline double fd_wronskian_error(Eval&& basis_at, double x, double h, const Microstate& ms,
                                 const UnitSystem& units) {
    const BasisSample mid = basis_at(x);
    const BasisSample lo = basis_at(x - h);
    const BasisSample hi = basis_at(x + h);
    const double dphi = (hi.phi - lo.phi) / (2.0 * h);
    const double dtheta = (hi.theta - lo.theta) / (2.0 * h);
    const double w = mid.phi * dtheta - dphi * mid.theta;
    const double expected = std::sqrt(2.0 * units.mass / microstate_margin(ms)) / units.hbar;
    return w / expected - 1.0;
}

}  // namespace oracle

namespace detail {

inline Microstate random_microstate(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Microstate ms;
    ms.a = std::exp(u(rng));
    ms.b = std::exp(u(rng));
    std::uniform_real_distribution<double> uc(0.0, 0.9);
    ms.c = (u(rng) < 0.0 ? -1.0 : 1.0) * uc(rng) * 2.0 * std::sqrt(ms.a * ms.b);
    return ms;
}

inline BarrierScenario random_barrier(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uU(0.5, 10.0), ufrac(0.1, 0.9);
    BarrierScenario s;
    s.U = uU(rng);
    s.Ex = s.U * ufrac(rng);
    return s;
}

inline ObliqueScenario random_oblique(std::mt19937_64& rng) {
    const BarrierScenario base = random_barrier(rng);
    std::uniform_real_distribution<double> uk(0.1, 0.8);
    ObliqueScenario s;
    s.U = base.U;
    s.units = base.units;
    const double ky = uk(rng) * std::sqrt(2.0 * s.units.mass * base.Ex) / s.units.hbar;
    s.ky = ky;
    s.E = base.Ex + 0.5 * s.units.hbar * s.units.hbar * ky * ky / s.units.mass;
    return s;
}

inline WellScenario random_well(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uU(2.0, 60.0), uq(0.5, 3.0);
    WellScenario s;
    s.U = uU(rng);
    s.q = uq(rng);
    const int count = admissible_level_count(s.U, s.q, s.units);
    std::uniform_int_distribution<int> ul(0, count - 1);
    s.level = ul(rng);
    return s;
}

}  // namespace detail

/// Run the verification suite: every analytic identity is confronted with an
/// independent numerical oracle, and the interface probes are demonstrably
/// able to reject a wrongly anchored tail (see VerifyOptions).
inline std::vector<CheckResult> run_verification(const VerifyOptions& opt = {}) {
    std::mt19937_64 rng(opt.seed);
    const UnitSystem un{};
    std::vector<CheckResult> out;
    const auto record = [&out](const std::string& name, double measured, double tol) {
        out.push_back({name, tol, measured, std::isfinite(measured) && measured <= tol});
    };
    const WellThetaForm form =
        opt.inject_theta_misprint ? WellThetaForm::misprinted_tail : WellThetaForm::continuation;

    // --- basis versus adaptive ODE integration ---------------------------
    {
        double worst_b = 0.0, worst_w = 0.0;
        for (int i = 0; i < opt.scenario_count; ++i) {
            worst_b = std::max(worst_b, oracle::basis_vs_ode_barrier(detail::random_barrier(rng),
                                                                     detail::random_microstate(rng)));
            worst_w = std::max(worst_w, oracle::basis_vs_ode_well(detail::random_well(rng),
                                                                  detail::random_microstate(rng)));
        }
        record("barrier-basis-vs-ode", worst_b, 1e-8);
        record("well-basis-vs-ode", worst_w, 1e-8);
    }

    // --- interface probes (value continuity and straddling FD Wronskian) --
    {
        double worst_jump = 0.0, worst_fdw = 0.0;
        for (int i = 0; i < opt.scenario_count; ++i) {
            const WellScenario ws = detail::random_well(rng);
            const Microstate ms = detail::random_microstate(rng);
            const BoundLevel lv = solve_level(ws);
            const WellGeometry g = well_geometry(lv);
            const double N = detail::basis_prefactor(g.kx, ms, un);
            const auto at = [&](double x) { return eval_basis_well(x, g, ms, un, form); };
            const double eps_x = 1e-9 / std::max(g.kx, g.kappa);
            for (double w : {g.q, -g.q}) {
                const BasisSample inn = at(w - std::copysign(eps_x, w));
                const BasisSample outt = at(w + std::copysign(eps_x, w));
                worst_jump = std::max({worst_jump, std::abs(inn.phi - outt.phi) / N,
                                       std::abs(inn.theta - outt.theta) / N});
                const double h = 1e-5 / std::max(g.kx, g.kappa);
                worst_fdw = std::max(worst_fdw,
                                     std::abs(oracle::fd_wronskian_error(at, w, h, ms, un)));
            }
        }
        record("well-interface-continuity", worst_jump, 1e-6);
        record("well-interface-fd-wronskian", worst_fdw, 1e-3);
    }
    {
        double worst = 0.0;
        for (int i = 0; i < opt.scenario_count; ++i) {
            const BarrierScenario bs = detail::random_barrier(rng);
            const Microstate ms = detail::random_microstate(rng);
            const Wavenumbers wn = derive_wavenumbers(bs);
            const auto at = [&](double x) { return eval_basis_barrier(x, wn, ms, un); };
            const double h = 1e-5 / std::max(wn.kx, wn.kappa);
            worst = std::max(worst, std::abs(oracle::fd_wronskian_error(at, 0.0, h, ms, un)));
        }
        record("barrier-interface-fd-wronskian", worst, 1e-3);
    }

    // --- Wronskian normalization and Hamilton-Jacobi residual -------------
    {
        double worst_w = 0.0, worst_r = 0.0, worst_s = 0.0;
        std::uniform_real_distribution<double> ux(-1.0, 1.0);
        for (int i = 0; i < opt.scenario_count; ++i) {
            const BarrierScenario bs = detail::random_barrier(rng);
            const Microstate ms = detail::random_microstate(rng);
            const Wavenumbers wn = derive_wavenumbers(bs);
            for (int j = 0; j < 12; ++j) {
                const double x = ux(rng) * 8.0 / wn.kx + (ux(rng) > 0.5 ? 4.0 / wn.kappa : 0.0);
                const BasisSample s = eval_basis_barrier(x, wn, ms, un);
                worst_w = std::max(worst_w, std::abs(wronskian_normalization_error(s, ms, un)));
                const double V = potential(x, bs);
                worst_r = std::max(worst_r,
                                   std::abs(hj_residual(s, ms, un, V, bs.Ex)) / std::max(bs.Ex, 1.0));
            }
            const double xs = (bs.Ex > 0.3 * bs.U ? -2.5 : -1.5) / wn.kx;
            const auto p = [&](double x) { return conjugate_momentum(x, wn, ms, un); };
            const double g_in = -wn.kx * wn.kx;
            const double fd = oracle::fd_schwarzian(p, xs, 0.02 / wn.kx);
            const BasisSample s = eval_basis_barrier(xs, wn, ms, un);
            const double an = analytic_schwarzian(s, ms, g_in);
            worst_s = std::max(worst_s, un.hbar * un.hbar / (4.0 * un.mass) * std::abs(fd - an) /
                                            std::max(bs.Ex, 1.0));
        }
        record("wronskian-normalization", worst_w, 1e-10);
        record("hj-residual", worst_r, 1e-8);
        record("schwarzian-fd-vs-analytic", worst_s, 1e-6);
    }

    // --- barrier and oblique observables versus trajectory numerics -------
    {
        double worst_t = 0.0, worst_tq = 0.0, worst_y = 0.0;
        for (int i = 0; i < opt.scenario_count; ++i) {
            const ObliqueScenario os = detail::random_oblique(rng);
            const Microstate ms = detail::random_microstate(rng);
            const Wavenumbers wn = derive_wavenumbers(os);
            const double sat = 20.0 / wn.kappa;
            const double tR = reflection_time(os, ms);
            const double tj = 2.0 * (trajectory_time(sat, os, ms) - trajectory_time(0.0, os, ms));
            worst_t = std::max(worst_t, std::abs(tj / tR - 1.0));
            BarrierScenario bs;
            bs.U = os.U;
            bs.Ex = normal_energy(os);
            bs.units = os.units;
            worst_tq = std::max(worst_tq,
                                std::abs(oracle::numeric_reflection_time(bs, ms) /
                                             reflection_time(bs, ms) - 1.0));
            const double dy = gh_displacement(os, ms);
            const double yj = 2.0 * (trajectory_y(sat, os, ms) - trajectory_y(0.0, os, ms));
            worst_y = std::max(worst_y, std::abs(yj / dy - 1.0));
        }
        record("reflection-time-closed-vs-jacobi", worst_t, 1e-5);
        record("reflection-time-closed-vs-quadrature", worst_tq, 1e-6);
        record("gh-displacement-closed-vs-jacobi", worst_y, 1e-5);
    }

    // --- well and duct observables -----------------------------------------
    {
        double worst_t = 0.0, worst_lib = 0.0, worst_asm = 0.0, worst_dy = 0.0;
        for (int i = 0; i < opt.scenario_count; ++i) {
            const WellScenario ws = detail::random_well(rng);
            const Microstate ms = detail::random_microstate(rng);
            const BoundLevel lv = solve_level(ws);
            const WellReflectionTimes tw = reflection_times_well(lv, ms, un);
            const WellReflectionTimes tq = oracle::numeric_reflection_times_well(ws, lv, ms);
            worst_t = std::max({worst_t, std::abs(tq.t_plus / tw.t_plus - 1.0),
                                std::abs(tq.t_minus / tw.t_minus - 1.0)});
            const double lib = libration_period(lv, ms, un);
            const double sat = ws.q + 20.0 / lv.kappa;
            const double libj = 2.0 * (trajectory_time(sat, ws, lv, ms) -
                                       trajectory_time(-sat, ws, lv, ms));
            worst_lib = std::max(worst_lib, std::abs(libj / lib - 1.0));
            const double asmb = tw.t_plus + tw.t_minus + 2.0 * interior_crossing_time(lv, ms, un);
            worst_asm = std::max(worst_asm, std::abs(asmb / lib - 1.0));

            DuctScenario ds;
            ds.well = ws;
            std::uniform_real_distribution<double> uk(0.2, 1.2);
            ds.ky = uk(rng);
            const DuctDisplacements dy = gh_displacements_duct(ds, lv, ms);
            const double yp = 2.0 * (trajectory_y(sat, ds, lv, ms) - trajectory_y(ws.q, ds, lv, ms));
            const double ylib = 2.0 * (trajectory_y(sat, ds, lv, ms) - trajectory_y(-sat, ds, lv, ms));
            worst_dy = std::max({worst_dy, std::abs(yp / dy.dy_plus - 1.0),
                                 std::abs(ylib / libration_displacement(ds, lv, ms) - 1.0)});
        }
        record("well-times-closed-vs-quadrature", worst_t, 1e-6);
        record("libration-closed-vs-jacobi", worst_lib, 1e-5);
        record("libration-assembly-identity", worst_asm, 1e-12);
        record("duct-dy-closed-vs-jacobi", worst_dy, 1e-5);
    }

    // --- quantization and action --------------------------------------------
    {
        double worst_res = 0.0, worst_j = 0.0, worst_jq = 0.0;
        for (int i = 0; i < opt.scenario_count; ++i) {
            const WellScenario ws = detail::random_well(rng);
            const BoundLevel lv = solve_level(ws);
            worst_res = std::max(worst_res, std::abs(lv.residual));
            const Microstate ms = detail::random_microstate(rng);
            const double J = action_variable(lv, ms, un);
            const double Jexp = (2.0 * lv.n + 1.0) * 2.0 * M_PI * un.hbar;
            worst_j = std::max(worst_j, std::abs(J / Jexp - 1.0));
            worst_jq = std::max(worst_jq,
                                std::abs(oracle::action_quadrature(lv, ms, un) / Jexp - 1.0));
        }
        record("quantization-residual", worst_res, 1e-12);
        record("action-odd-multiples", worst_j, 1e-10);
        record("action-quadrature", worst_jq, 1e-8);
    }

    // --- invariants, reconstruction, decomposition --------------------------
    {
        double worst_e = 0.0, worst_rec = 0.0, worst_dec = 0.0;
        std::uniform_real_distribution<double> ux(-1.0, 1.0);
        for (int i = 0; i < opt.scenario_count; ++i) {
            const BarrierScenario bs = detail::random_barrier(rng);
            const Microstate ms = detail::random_microstate(rng);
            const Wavenumbers wn = derive_wavenumbers(bs);
            const double I = ermakov_invariant(ms);
            for (int j = 0; j < 10; ++j) {
                const double x = ux(rng) * 6.0 / wn.kx + (j % 2 ? 3.0 / wn.kappa : 0.0);
                const BasisSample s = eval_basis_barrier(x, wn, ms, un);
                worst_e = std::max(worst_e, std::abs(pointwise_ermakov(s, ms, un) / I - 1.0));
                const double scale = std::max(std::abs(s.phi), std::abs(s.theta));
                worst_rec = std::max(worst_rec,
                                     std::abs(reconstruct_wavefunction(s, ms) - s.phi) / scale);
                const auto [zp, zm] = decompose_waves(s, ms);
                worst_dec = std::max(worst_dec, std::abs((zp + zm).real() - s.phi) / scale +
                                                    std::abs((zp + zm).imag()) / scale);
            }
        }
        record("ermakov-pointwise-constancy", worst_e, 1e-10);
        record("reconstruction-identity", worst_rec, 1e-12);
        record("decomposition-sum", worst_dec, 1e-12);
    }

    // --- inversion round trip and overdetermination teeth -------------------
    {
        double worst_rt = 0.0;
        DuctScenario last{};
        MotionConstants last_mc{};
        for (int i = 0; i < opt.scenario_count * 20; ++i) {
            DuctScenario ds;
            ds.well = detail::random_well(rng);
            std::uniform_real_distribution<double> uk(0.2, 1.2);
            ds.ky = uk(rng);
            const Microstate ms = detail::random_microstate(rng);
            const BoundLevel lv = solve_level(ds.well);
            const MotionConstants mc = motion_constants(ds, lv, ms);
            const Microstate rec = recover_coefficients(mc, ds, lv);
            worst_rt = std::max({worst_rt, std::abs(rec.a / ms.a - 1.0),
                                 std::abs(rec.b / ms.b - 1.0),
                                 std::abs(rec.c - ms.c) / std::sqrt(ms.a * ms.b)});
            last = ds;
            last_mc = mc;
        }
        record("inversion-round-trip", worst_rt, 1e-9);
        const OverdeterminationReport clean = overdetermination_check(last_mc, last, 1e-6);
        record("overdetermination-consistent", clean.consistent ? clean.rel_discrepancy : 1.0, 1e-6);
        MotionConstants tampered = last_mc;
        tampered.dy_minus *= 1.01;
        const OverdeterminationReport dirty = overdetermination_check(tampered, last, 1e-3);
        out.push_back({"overdetermination-detects-tamper", 1e-3, dirty.rel_discrepancy,
                       !dirty.consistent && dirty.rel_discrepancy > 1e-3});
    }

    return out;
}

}  // namespace qhj
