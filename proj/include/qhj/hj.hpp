#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhj/basis.hpp"
#include "qhj/core.hpp"
#include "qhj/quantization.hpp"

/// Hamilton-Jacobi engine: the characteristic function
///     W(x) = hbar arctan[(b theta/phi + c/2) / D],  D = sqrt(a b - c^2/4),
/// its conjugate momentum p = dW/dx = sqrt(2m)/Q with Q = a phi^2 + b theta^2
/// + c phi theta, the quantum Hamilton-Jacobi residual, and trajectories
/// obtained the Jacobi way: t - tau = dW/dE and y - y0 = -(1/hbar) dW/dky,
/// both taken by Richardson-extrapolated central differences through valid
/// off-shell families of W.
namespace qhj {

/// One trajectory sample: time and transverse displacement are relative to
/// the trajectory constants (epoch tau, offset y0) fixed by the x = 0 point.
struct TrajectoryPoint {
    double x = 0.0;
    double t_rel = 0.0;
    double y_rel = 0.0;
    double p = 0.0;
    double W = 0.0;
};

/// Momentum components of the oblique / duct wave normal.
struct WaveNormal {
    double px = 0.0;
    double py = 0.0;
};

inline double quadratic_form(const BasisSample& s, const Microstate& ms) {
    return ms.a * s.phi * s.phi + ms.b * s.theta * s.theta + ms.c * s.phi * s.theta;
}

inline double quadratic_form_slope(const BasisSample& s, const Microstate& ms) {
    return 2.0 * ms.a * s.phi * s.dphi + 2.0 * ms.b * s.theta * s.dtheta +
           ms.c * (s.dphi * s.theta + s.phi * s.dtheta);
}

/// Q1 = a phi'^2 + b theta'^2 + c phi' theta', the derivative-form companion
/// entering Q'' = 2 Q1 + 2 g Q on solutions of phi'' = g phi.
inline double derivative_form(const BasisSample& s, const Microstate& ms) {
    return ms.a * s.dphi * s.dphi + ms.b * s.dtheta * s.dtheta + ms.c * s.dphi * s.dtheta;
}

/// Schwarzian derivative of W computed analytically from one basis sample:
///     {W; x} = W'''/W' - (3/2)(W''/W')^2 = (1/2)(Q'/Q)^2 - 2 Q1/Q - 2 g,
/// where g = 2 m (V - E) / hbar^2 is the local ODE coefficient.
inline double analytic_schwarzian(const BasisSample& s, const Microstate& ms, double g) {
    const double Q = quadratic_form(s, ms);
    const double Qp = quadratic_form_slope(s, ms);
    const double Q1 = derivative_form(s, ms);
    return 0.5 * (Qp / Q) * (Qp / Q) - 2.0 * Q1 / Q - 2.0 * g;
}

/// Quantum Hamilton-Jacobi residual
///     (W')^2 / 2m + V - E + (hbar^2 / 4m) {W; x}
/// with every derivative taken from the sample fields, so that a sample not
/// solving the wave equation (or breaking the Wronskian normalization) yields
/// a nonzero residual instead of a vacuous identity.
inline double hj_residual(const BasisSample& s, const Microstate& ms, const UnitSystem& units,
                          double V, double E) {
    const double g = 2.0 * units.mass * (V - E) / (units.hbar * units.hbar);
    const double Q = quadratic_form(s, ms);
    const double p = std::sqrt(2.0 * units.mass) / Q;
    const double schw = analytic_schwarzian(s, ms, g);
    return p * p / (2.0 * units.mass) + V - E +
           units.hbar * units.hbar / (4.0 * units.mass) * schw;
}

inline double potential(double x, const BarrierScenario& s) { return x < 0.0 ? 0.0 : s.U; }

inline double potential(double x, const WellScenario& s) {
    return std::abs(x) <= s.q ? -s.U : 0.0;
}

/// Bound-level energy on the convention V = -U inside, 0 outside:
/// E_n = -hbar^2 kappa^2 / (2m) < 0.
inline double bound_energy(const BoundLevel& lv, const UnitSystem& units = {}) {
    return -0.5 * units.hbar * units.hbar * lv.kappa * lv.kappa / units.mass;
}

/// dW/dx = sqrt(2m)/Q for the barrier basis. Evanescent tails are evaluated
/// in exponentially scaled form, so the momentum underflows gracefully to an
/// exact +0.0 far inside the barrier instead of overflowing or producing NaN.
inline double conjugate_momentum(double x, const Wavenumbers& wn, const Microstate& ms,
                                 const UnitSystem& units) {
    validate_units(units);
    validate_microstate(ms);
    const double root2m = std::sqrt(2.0 * units.mass);
    const double N2 = detail::basis_prefactor(wn.kx, ms, units);
    const double nn = N2 * N2;
    if (x < 0.0) {
        const double z = wn.kx * x + std::atan2(wn.kappa, wn.kx);
        const double co = std::cos(z), si = std::sin(z);
        const double Q = nn * (ms.a * co * co + ms.b * si * si + ms.c * si * co);
        return root2m / Q;
    }
    const double r = wn.kappa / wn.kx;
    const double s = std::sqrt(1.0 + r * r);
    const double cg = (r + 1.0 / r) / (2.0 * s), cd = (r - 1.0 / r) / (2.0 * s);
    const double em2 = std::exp(-2.0 * wn.kappa * x);  // underflows to 0 harmlessly
    const double ph = em2 / s;                          // phi / e^{+kappa x}
    const double th = cg + cd * em2;                    // theta / e^{+kappa x}
    const double qbar = ms.a * ph * ph + ms.b * th * th + ms.c * ph * th;
    return root2m * em2 / (nn * qbar);
}

/// dW/dx for the on-shell well basis (same scaled-tail treatment).
inline double conjugate_momentum(double x, const WellGeometry& g, const Microstate& ms,
                                 const UnitSystem& units) {
    validate_units(units);
    validate_microstate(ms);
    const double root2m = std::sqrt(2.0 * units.mass);
    const double N2 = detail::basis_prefactor(g.kx, ms, units);
    const double nn = N2 * N2;
    if (std::abs(x) <= g.q) {
        const double co = std::cos(g.kx * x), si = std::sin(g.kx * x);
        const double Q = nn * (ms.a * co * co + ms.b * si * si + ms.c * si * co);
        return root2m / Q;
    }
    const detail::WellTailCoef w = detail::well_tail_coef(g, WellThetaForm::continuation);
    const double xi = std::abs(x) - g.q;
    const double em2 = std::exp(-2.0 * g.kappa * xi);
    const double ph = w.Gp + w.Fp * em2;           // phi / e^{+kappa xi}
    const double th = w.At + w.Bt * em2;           // |theta| / e^{+kappa xi}
    const double csgn = x > 0.0 ? ms.c : -ms.c;    // theta is odd
    const double qbar = ms.a * ph * ph + ms.b * th * th + csgn * ph * th;
    return root2m * em2 / (nn * qbar);
}

/// W(x) for the barrier basis, branch-unwrapped and continuous, with the
/// principal branch pinned at x = 0.
inline double hamilton_characteristic(double x, const Wavenumbers& wn, const Microstate& ms,
                                      const UnitSystem& units) {
    validate_units(units);
    return units.hbar * detail::barrier_W_reduced(x, wn, detail::ms_form(ms));
}

/// W(x) for the on-shell well basis.
inline double hamilton_characteristic(double x, const WellGeometry& g, const Microstate& ms,
                                      const UnitSystem& units) {
    validate_units(units);
    return units.hbar * detail::well_W_reduced(x, g, detail::ms_form(ms));
}

namespace detail {

/// Richardson-extrapolated central difference: Neville tableau over step
/// halvings h, h/2, h/4, h/8, returning the entry with the smallest
/// successive-difference error estimate. Throws when the tableau does not
/// converge, naming the expansion point and initial step.
template <class F>
inline double richardson_derivative(F&& f, double x0, double h0, double rel_tol = 5e-6) {
    if (!(h0 > 0.0) || !std::isfinite(h0))
        throw std::invalid_argument("richardson_derivative: step must be positive and finite");
    constexpr int levels = 4;
    double tab[levels][levels];
    double best = std::numeric_limits<double>::quiet_NaN();
    double best_err = std::numeric_limits<double>::infinity();
    for (int i = 0; i < levels; ++i) {
        const double h = h0 / static_cast<double>(1 << i);
        tab[i][0] = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
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
        throw std::runtime_error("richardson_derivative: no convergence at x0 = " +
                                 std::to_string(x0) + " with initial step " + std::to_string(h0) +
                                 " (error estimate " + std::to_string(best_err) + ")");
    return best;
}

/// Off-shell barrier family W(x; Ex) at fixed U: valid (C^1 in x) for every
/// 0 < Ex < U, so dW/dE may be taken through it.
inline double barrier_W_offshell(double x, double Ex, double U, const MsForm& f,
                                 const UnitSystem& units) {
    const double h = units.hbar, m = units.mass;
    const Wavenumbers wn{std::sqrt(2.0 * m * Ex) / h, std::sqrt(2.0 * m * (U - Ex)) / h};
    return h * barrier_W_reduced(x, wn, f);
}

/// Interior well family W(x; E) on V = -U: phase of (cos kx x, sin kx x) with
/// kx(E) = sqrt(2 m (E + U))/hbar, valid for every E > -U.
inline double well_interior_W_offshell(double x, double E, double U, const MsForm& f,
                                       const UnitSystem& units) {
    const double kx = std::sqrt(2.0 * units.mass * (E + U)) / units.hbar;
    return units.hbar * osc_phase(kx * x, f);
}

/// Tail family anchored at its own interface: W(xi; E) for the decaying
/// continuation whose interface slope ratio is kappa(E)/kx(E), measured a
/// depth xi into the tail. Differences of this family across the same leg
/// carry the energy dependence of the tail transit.
inline double anchored_tail_W_offshell(double xi, double E, double U, const MsForm& f,
                                       const UnitSystem& units) {
    const double m = units.mass, h = units.hbar;
    const double kx = std::sqrt(2.0 * m * (E + U)) / h;
    const double kap = std::sqrt(-2.0 * m * E) / h;
    return h * (tail_phase(tail_rho(xi, kx, kap), f) - tail_phase(tail_rho(0.0, kx, kap), f));
}

inline double fd_energy_step(double E_lo_margin, double E_hi_margin, double scale) {
    const double h0 = std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
    return std::min(h0, 0.45 * std::min(E_lo_margin, E_hi_margin));
}

}  // namespace detail

/// t(x) - tau for the barrier trajectory, via dW/dE through the off-shell
/// family at fixed x. The epoch tau is the family's own: t = 0 where dW/dE
/// vanishes, and differences of this function are epoch-free.
inline double trajectory_time(double x, const BarrierScenario& scen, const Microstate& ms) {
    validate_scenario(scen);
    const detail::MsForm f = detail::ms_form(ms);
    const double h = detail::fd_energy_step(scen.Ex, scen.U - scen.Ex, scen.U);
    return detail::richardson_derivative(
        [&](double Ep) { return detail::barrier_W_offshell(x, Ep, scen.U, f, scen.units); },
        scen.Ex, h);
}

/// t(x) - tau for the oblique trajectory: dW/dE at fixed ky, which reduces to
/// the barrier family at the normal energy Ex = E - hbar^2 ky^2 / 2m.
inline double trajectory_time(double x, const ObliqueScenario& scen, const Microstate& ms) {
    validate_scenario(scen);
    BarrierScenario normal;
    normal.U = scen.U;
    normal.Ex = normal_energy(scen);
    normal.units = scen.units;
    return trajectory_time(x, normal, ms);
}

/// t(x) - tau for the well libration at a bound level: interior leg through
/// the oscillatory family, tail legs through the interface-anchored family,
/// glued by time continuity at x = +-q. tau is fixed by t(0) = 0.
inline double trajectory_time(double x, const WellScenario& scen, const BoundLevel& lv,
                              const Microstate& ms) {
    validate_scenario(scen);
    const UnitSystem& un = scen.units;
    const detail::MsForm f = detail::ms_form(ms);
    const double E = bound_energy(lv, un);
    const double U = scen.U, q = scen.q;
    const double h = detail::fd_energy_step(-E, E + U, U);
    const auto t_interior = [&](double s) {
        return detail::richardson_derivative(
            [&](double Ep) { return detail::well_interior_W_offshell(s, Ep, U, f, un); }, E, h);
    };
    if (std::abs(x) <= q) return x == 0.0 ? 0.0 : t_interior(x);
    const double xi = std::abs(x) - q;
    const detail::MsForm ftail{f.a, f.b, x > 0.0 ? f.c : -f.c, f.D};
    const double leg = detail::richardson_derivative(
        [&](double Ep) { return detail::anchored_tail_W_offshell(xi, Ep, U, ftail, un); }, E, h);
    return x > 0.0 ? t_interior(q) + leg : t_interior(-q) - leg;
}

inline double trajectory_time(double x, const DuctScenario& scen, const BoundLevel& lv,
                              const Microstate& ms) {
    return trajectory_time(x, scen.well, lv, ms);
}

/// y(x) - y0 for the oblique trajectory: -(1/hbar) dW/dky at fixed total E.
inline double trajectory_y(double x, const ObliqueScenario& scen, const Microstate& ms) {
    validate_scenario(scen);
    const UnitSystem& un = scen.units;
    const detail::MsForm f = detail::ms_form(ms);
    const double Ex = normal_energy(scen);
    const double m = un.mass, hb = un.hbar;
    const double kscale = std::sqrt(2.0 * m * scen.U) / hb;
    // A ky step dk shifts the normal energy by about hbar^2 ky dk / m; keep
    // that (and the quadratic term) well inside (0, U).
    const double margin = 0.45 * std::min(Ex, scen.U - Ex);
    double hk = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(std::abs(scen.ky), 0.1 * kscale);
    if (std::abs(scen.ky) > 0.0) hk = std::min(hk, margin * m / (hb * hb * std::abs(scen.ky)));
    hk = std::min(hk, std::sqrt(margin * m) / hb);
    const double dWdky = detail::richardson_derivative(
        [&](double kyp) {
            ObliqueScenario s2 = scen;
            s2.ky = kyp;
            return un.hbar * detail::barrier_W_reduced(x, derive_wavenumbers(s2), f);
        },
        scen.ky, hk);
    return -dWdky / un.hbar;
}

/// y(x) - y0 for the duct trajectory: -(1/hbar) dW/dky at fixed total energy
/// E_tot = E_n + hbar^2 ky^2 / 2m, taken through the same composite family
/// used for the libration time.
inline double trajectory_y(double x, const DuctScenario& scen, const BoundLevel& lv,
                           const Microstate& ms) {
    validate_scenario(scen);
    const UnitSystem& un = scen.well.units;
    const detail::MsForm f = detail::ms_form(ms);
    const double m = un.mass, hb = un.hbar;
    const double U = scen.well.U, q = scen.well.q;
    const double En = bound_energy(lv, un);
    const double Etot = En + 0.5 * hb * hb * scen.ky * scen.ky / m;
    const auto W_comp = [&](double kyp) {
        const double E = Etot - 0.5 * hb * hb * kyp * kyp / m;
        if (std::abs(x) <= q) return detail::well_interior_W_offshell(x, E, U, f, un);
        const double xi = std::abs(x) - q;
        const detail::MsForm ftail{f.a, f.b, x > 0.0 ? f.c : -f.c, f.D};
        const double leg = detail::anchored_tail_W_offshell(xi, E, U, ftail, un);
        const double Win = detail::well_interior_W_offshell(x > 0.0 ? q : -q, E, U, f, un);
        return x > 0.0 ? Win + leg : Win - leg;
    };
    const double margin = 0.45 * std::min(-En, En + U);
    const double kscale = std::sqrt(2.0 * m * U) / hb;
    double hk = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(std::abs(scen.ky), 0.1 * kscale);
    if (std::abs(scen.ky) > 0.0) hk = std::min(hk, margin * m / (hb * hb * std::abs(scen.ky)));
    hk = std::min(hk, std::sqrt(margin * m) / hb);
    const double dWdky = detail::richardson_derivative(W_comp, scen.ky, hk);
    return -dWdky / hb;
}

inline WaveNormal wave_normal(double x, const ObliqueScenario& scen, const Microstate& ms) {
    const Wavenumbers wn = derive_wavenumbers(scen);
    return {conjugate_momentum(x, wn, ms, scen.units), scen.units.hbar * scen.ky};
}

inline WaveNormal wave_normal(double x, const DuctScenario& scen, const BoundLevel& lv,
                              const Microstate& ms) {
    return {conjugate_momentum(x, well_geometry(lv), ms, scen.well.units),
            scen.well.units.hbar * scen.ky};
}

namespace detail {

inline void validate_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("sample_trajectory: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]))
            throw std::invalid_argument("sample_trajectory: grid point " + std::to_string(i) +
                                        " is not finite");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument(
                "sample_trajectory: grid must be strictly increasing, violated at x = " +
                std::to_string(grid[i]) + " (index " + std::to_string(i) + ")");
    }
}

inline void validate_sigma(int sigma) {
    if (sigma != 1 && sigma != -1)
        throw std::invalid_argument("sample_trajectory: sigma must be +1 or -1, got " +
                                    std::to_string(sigma));
}

}  // namespace detail

/// Trajectory table for the barrier: t relative to the interface arrival,
/// mirrored by sigma (the retreating branch has t -> -t and p -> -p; W is
/// branch-independent).
inline std::vector<TrajectoryPoint> sample_trajectory(const std::vector<double>& grid,
                                                      const BarrierScenario& scen,
                                                      const Microstate& ms, int sigma = 1) {
    detail::validate_grid(grid);
    detail::validate_sigma(sigma);
    const Wavenumbers wn = derive_wavenumbers(scen);
    const double t0 = trajectory_time(0.0, scen, ms);
    std::vector<TrajectoryPoint> out;
    out.reserve(grid.size());
    for (double x : grid) {
        TrajectoryPoint pt;
        pt.x = x;
        pt.t_rel = sigma * (trajectory_time(x, scen, ms) - t0) + 0.0;
        pt.y_rel = 0.0;
        pt.p = sigma * conjugate_momentum(x, wn, ms, scen.units);
        pt.W = hamilton_characteristic(x, wn, ms, scen.units);
        out.push_back(pt);
    }
    return out;
}

inline std::vector<TrajectoryPoint> sample_trajectory(const std::vector<double>& grid,
                                                      const ObliqueScenario& scen,
                                                      const Microstate& ms, int sigma = 1) {
    detail::validate_grid(grid);
    detail::validate_sigma(sigma);
    const Wavenumbers wn = derive_wavenumbers(scen);
    const double t0 = trajectory_time(0.0, scen, ms);
    const double y0 = trajectory_y(0.0, scen, ms);
    std::vector<TrajectoryPoint> out;
    out.reserve(grid.size());
    for (double x : grid) {
        TrajectoryPoint pt;
        pt.x = x;
        pt.t_rel = sigma * (trajectory_time(x, scen, ms) - t0) + 0.0;
        pt.y_rel = sigma * (trajectory_y(x, scen, ms) - y0) + 0.0;
        pt.p = sigma * conjugate_momentum(x, wn, ms, scen.units);
        pt.W = hamilton_characteristic(x, wn, ms, scen.units);
        out.push_back(pt);
    }
    return out;
}

inline std::vector<TrajectoryPoint> sample_trajectory(const std::vector<double>& grid,
                                                      const WellScenario& scen,
                                                      const Microstate& ms, int sigma = 1) {
    detail::validate_grid(grid);
    detail::validate_sigma(sigma);
    const BoundLevel lv = solve_level(scen);
    const WellGeometry g = well_geometry(lv);
    std::vector<TrajectoryPoint> out;
    out.reserve(grid.size());
    for (double x : grid) {
        TrajectoryPoint pt;
        pt.x = x;
        pt.t_rel = sigma * trajectory_time(x, scen, lv, ms) + 0.0;
        pt.y_rel = 0.0;
        pt.p = sigma * conjugate_momentum(x, g, ms, scen.units);
        pt.W = hamilton_characteristic(x, g, ms, scen.units);
        out.push_back(pt);
    }
    return out;
}

inline std::vector<TrajectoryPoint> sample_trajectory(const std::vector<double>& grid,
                                                      const DuctScenario& scen,
                                                      const Microstate& ms, int sigma = 1) {
    detail::validate_grid(grid);
    detail::validate_sigma(sigma);
    const BoundLevel lv = solve_level(scen.well);
    const WellGeometry g = well_geometry(lv);
    std::vector<TrajectoryPoint> out;
    out.reserve(grid.size());
    for (double x : grid) {
        TrajectoryPoint pt;
        pt.x = x;
        pt.t_rel = sigma * trajectory_time(x, scen, lv, ms) + 0.0;
        pt.y_rel = sigma * trajectory_y(x, scen, lv, ms) + 0.0;
        pt.p = sigma * conjugate_momentum(x, g, ms, scen.well.units);
        pt.W = hamilton_characteristic(x, g, ms, scen.well.units);
        out.push_back(pt);
    }
    return out;
}

}  // namespace qhj
