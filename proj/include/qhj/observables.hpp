#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <utility>

#include "qhj/basis.hpp"
#include "qhj/core.hpp"
#include "qhj/hj.hpp"
#include "qhj/quantization.hpp"

/// Closed-form microstate observables: reflection times, transverse
/// (Goos-Haenchen) displacements, libration periods, the Ermakov and
/// Wronskian invariants, wavefunction reconstruction, and the
/// constants-of-motion record with its inversion back to (a, b, c).
///
/// Throughout, r = kappa/kx and
///     S+- = a +- c r + b r^2,
///     DEN = (a + b r^2)^2 - c^2 r^2,
///     D   = sqrt(a b - c^2/4).
namespace qhj {

namespace detail {

inline double splus(const Microstate& ms, double r) { return ms.a + ms.c * r + ms.b * r * r; }
inline double sminus(const Microstate& ms, double r) { return ms.a - ms.c * r + ms.b * r * r; }

inline double libration_den(const Microstate& ms, double r) {
    const double s = ms.a + ms.b * r * r;
    return s * s - ms.c * ms.c * r * r;
}

// Forming the product kappa*kx as sqrt(kx^2 kappa^2) and the ratio r^2 as
// kappa^2/kx^2 straight from the squared wavenumbers keeps rational energy
// inputs exact: for hbar = m = 1, U = 2, Ex = 1 the result is the double 1.0,
// with no sqrt(2)*sqrt(2) rounding residue.
inline double reflection_time_from_squares(double kx2, double kap2, const Microstate& ms,
                                           const UnitSystem& units) {
    validate_units(units);
    validate_microstate(ms);
    const double r2 = kap2 / kx2;
    const double r = std::sqrt(r2);
    const double D = std::sqrt(microstate_margin(ms));
    return 2.0 * D * (1.0 + r2) * units.mass /
           ((ms.a + ms.c * r + ms.b * r2) * units.hbar * std::sqrt(kx2 * kap2));
}

}  // namespace detail

/// Microstate-dependent reflection time of the barrier trajectory,
///     t_R = 2 D (1 + r^2) m / (S+ hbar kappa kx).
inline double reflection_time(const Wavenumbers& wn, const Microstate& ms,
                              const UnitSystem& units) {
    return detail::reflection_time_from_squares(wn.kx * wn.kx, wn.kappa * wn.kappa, ms, units);
}

inline double reflection_time(const BarrierScenario& scen, const Microstate& ms) {
    validate_scenario(scen);
    const double h = scen.units.hbar, m = scen.units.mass;
    const double kx2 = 2.0 * m * scen.Ex / (h * h);
    const double kap2 = 2.0 * m * (scen.U - scen.Ex) / (h * h);
    return detail::reflection_time_from_squares(kx2, kap2, ms, scen.units);
}

inline double reflection_time(const ObliqueScenario& scen, const Microstate& ms) {
    validate_scenario(scen);
    const double h = scen.units.hbar, m = scen.units.mass;
    const double kx2 = 2.0 * m * scen.E / (h * h) - scen.ky * scen.ky;
    const double kap2 = 2.0 * m * (scen.U - scen.E) / (h * h) + scen.ky * scen.ky;
    return detail::reflection_time_from_squares(kx2, kap2, ms, scen.units);
}

/// Transverse displacement accumulated over one oblique reflection,
///     dy = 2 D (1 + r^2) ky / (S+ kappa kx) = t_R hbar ky / m.
inline double gh_displacement(const ObliqueScenario& scen, const Microstate& ms) {
    return reflection_time(scen, ms) * scen.units.hbar * scen.ky / scen.units.mass;
}

/// Reflection times at the two well walls; the sign of c distinguishes them.
struct WellReflectionTimes {
    double t_plus = 0.0;   ///< wall at x = +q
    double t_minus = 0.0;  ///< wall at x = -q
};

inline WellReflectionTimes reflection_times_well(const BoundLevel& lv, const Microstate& ms,
                                                 const UnitSystem& units = {}) {
    validate_units(units);
    validate_microstate(ms);
    const double r = lv.kappa / lv.kx;
    const double D = std::sqrt(microstate_margin(ms));
    const double pre = 2.0 * D * (1.0 + r * r) * units.mass / (units.hbar * lv.kappa * lv.kx);
    return {pre / detail::splus(ms, r), pre / detail::sminus(ms, r)};
}

/// Interior transit time between the walls, t(+q) - t(-q):
///     2 D (1 + r^2) q m (a + b r^2) / (hbar kx DEN).
inline double interior_crossing_time(const BoundLevel& lv, const Microstate& ms,
                                     const UnitSystem& units = {}) {
    validate_units(units);
    validate_microstate(ms);
    const double r = lv.kappa / lv.kx;
    const double D = std::sqrt(microstate_margin(ms));
    return 2.0 * D * (1.0 + r * r) * lv.q * units.mass * (ms.a + ms.b * r * r) /
           (units.hbar * lv.kx * detail::libration_den(ms, r));
}

/// Full libration period of the bound trajectory,
///     t_Lib = 4 D (1 + r^2) (a + b r^2) / DEN * m (q + 1/kappa) / (hbar kx),
/// equal to t+ + t- + 2 (interior crossing).
inline double libration_period(const BoundLevel& lv, const Microstate& ms,
                               const UnitSystem& units = {}) {
    validate_units(units);
    validate_microstate(ms);
    const double r = lv.kappa / lv.kx;
    const double D = std::sqrt(microstate_margin(ms));
    return 4.0 * D * (1.0 + r * r) * (ms.a + ms.b * r * r) / detail::libration_den(ms, r) *
           units.mass * (lv.q + 1.0 / lv.kappa) / (units.hbar * lv.kx);
}

/// Transverse displacements per wall reflection in the duct,
///     dy+- = 2 D (1 + r^2) ky / (S+- kappa kx).
struct DuctDisplacements {
    double dy_plus = 0.0;
    double dy_minus = 0.0;
};

inline DuctDisplacements gh_displacements_duct(const DuctScenario& scen, const BoundLevel& lv,
                                               const Microstate& ms) {
    const UnitSystem& un = scen.well.units;
    const WellReflectionTimes t = reflection_times_well(lv, ms, un);
    const double v = un.hbar * scen.ky / un.mass;
    return {t.t_plus * v, t.t_minus * v};
}

/// Transverse displacement over one full libration, dy_Lib = t_Lib hbar ky/m.
inline double libration_displacement(const DuctScenario& scen, const BoundLevel& lv,
                                     const Microstate& ms) {
    const UnitSystem& un = scen.well.units;
    return libration_period(lv, ms, un) * un.hbar * scen.ky / un.mass;
}

/// Ermakov invariant of the microstate, I = 1/(a - c^2/(4b)) = b/(ab - c^2/4).
inline double ermakov_invariant(const Microstate& ms) {
    validate_microstate(ms);
    return ms.b / microstate_margin(ms);
}

/// The same invariant assembled pointwise from one basis sample,
///     I(x) = phi^2/Q + (hbar^2/2m) Q [phi' - phi Q'/(2Q)]^2,
/// constant in x when the sample solves the wave equation with the correct
/// normalization.
inline double pointwise_ermakov(const BasisSample& s, const Microstate& ms,
                                const UnitSystem& units) {
    const double Q = quadratic_form(s, ms);
    const double Qp = quadratic_form_slope(s, ms);
    const double bracket = s.dphi - s.phi * Qp / (2.0 * Q);
    return s.phi * s.phi / Q +
           0.5 * units.hbar * units.hbar / units.mass * Q * bracket * bracket;
}

/// Squared Wronskian fixed by the normalization, W^2 = 2m/(hbar^2 (ab - c^2/4)).
inline double wronskian_sq(const Microstate& ms, const UnitSystem& units) {
    validate_units(units);
    validate_microstate(ms);
    return 2.0 * units.mass / (units.hbar * units.hbar * microstate_margin(ms));
}

/// Reconstruct the wavefunction from amplitude and phase of the microstate:
///     psi = sqrt(Q / (a - c^2/(4b))) cos(arg(D phi + i (b theta + c phi/2))),
/// which collapses identically to phi.
inline double reconstruct_wavefunction(const BasisSample& s, const Microstate& ms) {
    validate_microstate(ms);
    const double Q = quadratic_form(s, ms);
    const double D = std::sqrt(microstate_margin(ms));
    const double phase = std::atan2(ms.b * s.theta + 0.5 * ms.c * s.phi, D * s.phi);
    return std::sqrt(Q / (ms.a - ms.c * ms.c / (4.0 * ms.b))) * std::cos(phase);
}

/// Split the real microstate wave into counter-propagating components,
///     zeta+- = [1 +- i c/(2D)] phi/2 +- i b theta/(2D),
/// whose sum is phi; for a = b, c = 0 they are the incident/reflected plane
/// waves with equal amplitude.
inline std::pair<std::complex<double>, std::complex<double>> decompose_waves(
    const BasisSample& s, const Microstate& ms) {
    validate_microstate(ms);
    const double D = std::sqrt(microstate_margin(ms));
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> zp = (1.0 + i * ms.c / (2.0 * D)) * 0.5 * s.phi +
                                    i * ms.b / (2.0 * D) * s.theta;
    const std::complex<double> zm = (1.0 - i * ms.c / (2.0 * D)) * 0.5 * s.phi -
                                    i * ms.b / (2.0 * D) * s.theta;
    return {zp, zm};
}

/// Constants of motion of one duct microstate: every entry is conserved along
/// the trajectory, and together they overdetermine (a, b, c).
struct MotionConstants {
    double w_squared = 0.0;     ///< squared Wronskian
    double ermakov = 0.0;       ///< Ermakov invariant
    double t_plus = 0.0;        ///< reflection time, wall at +q
    double t_minus = 0.0;       ///< reflection time, wall at -q
    double t_libration = 0.0;   ///< full libration period
    double dy_plus = 0.0;       ///< transverse displacement, wall at +q
    double dy_minus = 0.0;      ///< transverse displacement, wall at -q
    double dy_libration = 0.0;  ///< transverse displacement per libration
    double action = 0.0;        ///< action variable, (2n + 1) h
    double energy = 0.0;        ///< total energy E_n + hbar^2 ky^2 / 2m
};

inline MotionConstants motion_constants(const DuctScenario& scen, const BoundLevel& lv,
                                        const Microstate& ms) {
    validate_scenario(scen);
    const UnitSystem& un = scen.well.units;
    MotionConstants mc;
    mc.w_squared = wronskian_sq(ms, un);
    mc.ermakov = ermakov_invariant(ms);
    const WellReflectionTimes t = reflection_times_well(lv, ms, un);
    mc.t_plus = t.t_plus;
    mc.t_minus = t.t_minus;
    mc.t_libration = libration_period(lv, ms, un);
    const DuctDisplacements dy = gh_displacements_duct(scen, lv, ms);
    mc.dy_plus = dy.dy_plus;
    mc.dy_minus = dy.dy_minus;
    mc.dy_libration = libration_displacement(scen, lv, ms);
    mc.action = (2.0 * lv.n + 1.0) * 2.0 * M_PI * un.hbar;
    mc.energy = bound_energy(lv, un) + 0.5 * un.hbar * un.hbar * scen.ky * scen.ky / un.mass;
    return mc;
}

inline MotionConstants motion_constants(const DuctScenario& scen, const Microstate& ms) {
    return motion_constants(scen, solve_level(scen.well), ms);
}

/// Invert (W^2, I, dy+, dy-) back to the microstate:
///     D = sqrt(2m / (hbar^2 W^2)),
///     b = (2m/hbar^2) I / W^2,
///     c = D (1 + r^2) (ky/kappa^2) (1/dy+ - 1/dy-),
///     a = D (1 + r^2) (ky/(kappa kx)) (1/dy+ + 1/dy-) - b r^2.
/// Requires ky != 0 (the transverse displacements vanish otherwise) and a
/// result satisfying the positivity constraints.
inline Microstate recover_coefficients(const MotionConstants& mc, const DuctScenario& scen,
                                       const BoundLevel& lv) {
    validate_scenario(scen);
    const UnitSystem& un = scen.well.units;
    if (scen.ky == 0.0)
        throw std::invalid_argument(
            "recover_coefficients: inversion requires ky != 0 (transverse displacements vanish)");
    if (!(mc.w_squared > 0.0) || !(mc.ermakov > 0.0))
        throw std::invalid_argument(
            "recover_coefficients: W^2 and the Ermakov invariant must be positive");
    if (mc.dy_plus == 0.0 || mc.dy_minus == 0.0)
        throw std::invalid_argument("recover_coefficients: transverse displacements must be nonzero");
    const double m = un.mass, hb = un.hbar;
    const double r = lv.kappa / lv.kx;
    const double D = std::sqrt(2.0 * m / (hb * hb * mc.w_squared));
    Microstate ms;
    ms.b = 2.0 * m * mc.ermakov / (hb * hb * mc.w_squared);
    ms.c = D * (1.0 + r * r) * scen.ky / (lv.kappa * lv.kappa) *
           (1.0 / mc.dy_plus - 1.0 / mc.dy_minus);
    ms.a = D * (1.0 + r * r) * scen.ky / (lv.kappa * lv.kx) *
               (1.0 / mc.dy_plus + 1.0 / mc.dy_minus) -
           ms.b * r * r;
    validate_microstate(ms);
    return ms;
}

inline Microstate recover_coefficients(const MotionConstants& mc, const DuctScenario& scen) {
    return recover_coefficients(mc, scen, solve_level(scen.well));
}

/// Result of replaying a constants record against its own inversion.
struct OverdeterminationReport {
    bool consistent = false;
    double rel_discrepancy = 0.0;       ///< worst relative mismatch over all entries
    double predicted_dy_libration = 0.0;
    Microstate recovered{};
};

/// Recover (a, b, c) from the invertible subset of the record, recompute
/// every remaining entry, and report the worst relative mismatch. A genuine
/// microstate record passes at tol; a tampered one (or one from a different
/// trajectory) does not.
inline OverdeterminationReport overdetermination_check(const MotionConstants& mc,
                                                       const DuctScenario& scen,
                                                       double tol = 1e-6) {
    validate_scenario(scen);
    const BoundLevel lv = solve_level(scen.well);
    OverdeterminationReport rep;
    Microstate ms;
    try {
        ms = recover_coefficients(mc, scen, lv);
    } catch (const std::invalid_argument&) {
        rep.consistent = false;
        rep.rel_discrepancy = std::numeric_limits<double>::infinity();
        return rep;
    }
    rep.recovered = ms;
    const MotionConstants re = motion_constants(scen, lv, ms);
    rep.predicted_dy_libration = re.dy_libration;
    double worst = 0.0;
    const auto add = [&worst](double got, double want) {
        const double scale = std::max(std::abs(want), std::abs(got));
        if (scale > 0.0) worst = std::max(worst, std::abs(got - want) / scale);
        else if (got != want) worst = std::numeric_limits<double>::infinity();
    };
    add(re.w_squared, mc.w_squared);
    add(re.ermakov, mc.ermakov);
    add(re.t_plus, mc.t_plus);
    add(re.t_minus, mc.t_minus);
    add(re.t_libration, mc.t_libration);
    add(re.dy_plus, mc.dy_plus);
    add(re.dy_minus, mc.dy_minus);
    add(re.dy_libration, mc.dy_libration);
    add(re.action, mc.action);
    add(re.energy, mc.energy);
    rep.rel_discrepancy = worst;
    rep.consistent = worst <= tol;
    return rep;
}

}  // namespace qhj
