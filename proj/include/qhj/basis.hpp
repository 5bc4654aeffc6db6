#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "qhj/core.hpp"

/// Closed-form basis pairs (phi, theta) for the barrier and square-well
/// potentials, normalized so that the Wronskian satisfies
///     W^2 = phi theta' - phi' theta squared = 2 m / (hbar^2 (a b - c^2/4)).
/// All evaluators return values and analytic first derivatives; growing tails
/// are assembled from scaled exponentials internally and exposed as linear
/// values only while representable.
namespace qhj {

/// Basis pair and first derivatives at one point.
struct BasisSample {
    double x = 0.0;
    double phi = 0.0;
    double theta = 0.0;
    double dphi = 0.0;
    double dtheta = 0.0;
};

/// phi theta' - phi' theta.
inline double wronskian(const BasisSample& s) {
    return s.phi * s.dtheta - s.dphi * s.theta;
}

/// W^2 hbar^2 (a b - c^2/4) / (2 m) - 1; zero for a correctly normalized pair.
inline double wronskian_normalization_error(const BasisSample& s, const Microstate& ms,
                                            const UnitSystem& units) {
    const double w = wronskian(s);
    const double h = units.hbar;
    return w * w * h * h * microstate_margin(ms) / (2.0 * units.mass) - 1.0;
}

/// Geometry of an on-shell square-well level: wavenumbers plus half-width.
struct WellGeometry {
    double kx = 1.0;
    double kappa = 1.0;
    double q = 1.0;
};

/// Tail form selector for the well theta branch. `continuation` matches value
/// and slope of sin(kx x) at x = +-q (the correct analytic continuation);
/// `misprinted_tail` reproduces a plausible-looking but wrong decaying term,
/// e^{-kappa (x+q)} instead of e^{-kappa (x-q)}, kept only as a deliberate
/// fault to demonstrate that the verification suite catches it.
enum class WellThetaForm { continuation, misprinted_tail };

namespace detail {

/// Reduced microstate data used by every phase computation.
struct MsForm {
    double a, b, c, D;  // D = sqrt(a b - c^2/4)
};

inline MsForm ms_form(const Microstate& ms) {
    validate_microstate(ms);
    return {ms.a, ms.b, ms.c, std::sqrt(microstate_margin(ms))};
}

/// Exact branch-unwrapped phase of the vector
///     (D cos z, b sin z + (c/2) cos z)
/// as a function of z. Writing the vector as P e^{iz} + Q e^{-iz} with
/// P = (D + b + i c/2)/2 and Q = (D - b + i c/2)/2 gives |Q| < |P| strictly,
/// so the unwrapped phase stays within (-pi/2, pi/2) of z + arg P and the
/// winding integer is recovered exactly by rounding.
inline double osc_phase(double z, const MsForm& f) {
    const double X = f.D * std::cos(z);
    const double Y = f.b * std::sin(z) + 0.5 * f.c * std::cos(z);
    const double principal = std::atan2(Y, X);
    const double arg_p = std::atan2(0.5 * f.c, f.D + f.b);
    const double k = std::round((z + arg_p - principal) / M_PI);
    return principal + M_PI * k;
}

/// Principal arctangent of the phase coordinate u = (b rho + c/2)/D for a
/// tail region where phi keeps a fixed sign (rho = theta/phi). Valid as an
/// angle offset within one branch; rho may be +-infinity.
inline double tail_phase(double rho, const MsForm& f) {
    if (std::isinf(rho)) return rho > 0 ? M_PI / 2 : -M_PI / 2;
    return std::atan((f.b * rho + 0.5 * f.c) / f.D);
}

/// Normalization prefactor N = [2 m / (hbar^2 kx^2 (a b - c^2/4))]^{1/4}.
inline double basis_prefactor(double kx, const Microstate& ms, const UnitSystem& units) {
    const double h = units.hbar;
    return std::pow(2.0 * units.mass / (h * h * kx * kx * microstate_margin(ms)), 0.25);
}

/// Largest decay exponent for which e^{+kappa xi} stays representable with
/// headroom for the coefficients multiplying it.
inline constexpr double max_tail_exponent = 700.0;

[[noreturn]] inline void throw_tail_overflow(double x, double exponent) {
    throw std::overflow_error(
        "basis evaluation at x = " + std::to_string(x) +
        " overflows the linear representation (kappa*span = " + std::to_string(exponent) +
        "); use the momentum/phase entry points, which evaluate tails in scaled form");
}

/// Slope-matching continuation coefficients of the well pair across x = +q.
/// phi(x>q) = N (Gp e^{kappa xi} + Fp e^{-kappa xi}),
/// theta(x>q) = N (At e^{kappa xi} + Bt e^{-kappa xi}), xi = x - q.
/// On shell Gp vanishes (up to the quantization residual) and
/// At = 1/(2 sin kx q), Bt = -cos(2 kx q)/(2 sin kx q).
struct WellTailCoef {
    double Gp, Fp, At, Bt;
};

inline WellTailCoef well_tail_coef(const WellGeometry& g, WellThetaForm form) {
    const double s1 = std::sin(g.kx * g.q);
    const double co = std::cos(g.kx * g.q);
    const double t = g.kx / g.kappa;
    WellTailCoef w{};
    w.Gp = 0.5 * (co - t * s1);
    w.Fp = 0.5 * (co + t * s1);
    if (form == WellThetaForm::continuation) {
        w.At = 0.5 * (s1 + t * co);
        w.Bt = 0.5 * (s1 - t * co);
    } else {
        // Deliberate fault: decaying term anchored at x = -q instead of x = +q.
        w.At = 0.5 / s1;
        w.Bt = -0.5 * std::cos(2.0 * g.kx * g.q) / s1 * std::exp(-2.0 * g.kappa * g.q);
    }
    return w;
}

/// theta/phi on an evanescent tail whose pair is the C^1 continuation of a
/// unit-Wronskian oscillation hitting the interface with slope ratio kappa/kx:
///     rho(xi) = [(r + 1/r) e^{2 kappa xi} + (r - 1/r)] / 2,  r = kappa/kx.
/// Saturates to +infinity once the exponential overflows, which tail_phase
/// maps to the exact pi/2 limit.
inline double tail_rho(double xi, double kx, double kappa) {
    const double r = kappa / kx;
    const double e2 = std::exp(2.0 * kappa * xi);
    return 0.5 * ((r + 1.0 / r) * e2 + (r - 1.0 / r));
}

/// Unwrapped W/hbar for the barrier basis, continuous across x = 0 and exact
/// to one ulp of the winding count for arbitrarily deep oscillatory x.
inline double barrier_W_reduced(double x, const Wavenumbers& wn, const MsForm& f) {
    const double alpha = std::atan2(wn.kappa, wn.kx);
    if (x < 0.0) return osc_phase(wn.kx * x + alpha, f);
    const double r = wn.kappa / wn.kx;
    return osc_phase(alpha, f) + tail_phase(tail_rho(x, wn.kx, wn.kappa), f) - tail_phase(r, f);
}

/// Unwrapped W/hbar for the on-shell well basis. Tails use the bound-state
/// (purely decaying phi) limit, the correct on-shell branch: the growing phi
/// coefficient is a pure quantization residual and would otherwise flip the
/// saturation sign at xi ~ -ln(residual)/(2 kappa).
inline double well_W_reduced(double x, const WellGeometry& g, const MsForm& f) {
    if (std::abs(x) <= g.q) return osc_phase(g.kx * x, f);
    const WellTailCoef w = well_tail_coef(g, WellThetaForm::continuation);
    const double xi = std::abs(x) - g.q;
    const double e2 = std::exp(2.0 * g.kappa * xi);
    const double rho = (w.At * e2 + w.Bt) / w.Fp;
    const double rho0 = (w.At + w.Bt) / w.Fp;
    if (x > 0.0)
        return osc_phase(g.kx * g.q, f) + tail_phase(rho, f) - tail_phase(rho0, f);
    return osc_phase(-g.kx * g.q, f) + tail_phase(-rho, f) - tail_phase(-rho0, f);
}

}  // namespace detail

/// Closed-form barrier basis. For x < 0 (allowed region)
///     phi = N cos(kx x + alpha),  theta = N sin(kx x + alpha),
/// with alpha = arctan(kappa/kx); for x >= 0 (evanescent region)
///     phi = N e^{-kappa x} / s,
///     theta = N [(r + 1/r) e^{kappa x} + (r - 1/r) e^{-kappa x}] / (2 s),
/// with r = kappa/kx and s = sqrt(1 + r^2). The pair is C^1 at the interface
/// for every energy and carries Wronskian N^2 kx.
inline BasisSample eval_basis_barrier(double x, const Wavenumbers& wn, const Microstate& ms,
                                      const UnitSystem& units) {
    validate_units(units);
    validate_microstate(ms);
    if (!(wn.kx > 0.0) || !(wn.kappa > 0.0))
        throw std::invalid_argument("eval_basis_barrier: wavenumbers must be positive");
    const double N = detail::basis_prefactor(wn.kx, ms, units);
    const double r = wn.kappa / wn.kx;
    const double s = std::sqrt(1.0 + r * r);
    BasisSample out;
    out.x = x;
    if (x < 0.0) {
        const double z = wn.kx * x + std::atan2(wn.kappa, wn.kx);
        out.phi = N * std::cos(z);
        out.dphi = -N * wn.kx * std::sin(z);
        out.theta = N * std::sin(z);
        out.dtheta = N * wn.kx * std::cos(z);
    } else {
        const double kxpos = wn.kappa * x;
        if (kxpos > detail::max_tail_exponent) detail::throw_tail_overflow(x, kxpos);
        const double ep = std::exp(kxpos), em = std::exp(-kxpos);
        const double cg = (r + 1.0 / r) / (2.0 * s), cd = (r - 1.0 / r) / (2.0 * s);
        out.phi = N * em / s;
        out.dphi = -wn.kappa * out.phi;
        out.theta = N * (cg * ep + cd * em);
        out.dtheta = N * wn.kappa * (cg * ep - cd * em);
    }
    return out;
}

inline BasisSample eval_basis_barrier(double x, const BarrierScenario& scen, const Microstate& ms) {
    return eval_basis_barrier(x, derive_wavenumbers(scen), ms, scen.units);
}

inline BasisSample eval_basis_barrier(double x, const ObliqueScenario& scen, const Microstate& ms) {
    return eval_basis_barrier(x, derive_wavenumbers(scen), ms, scen.units);
}

/// Quantization residual tan(kx q) - kappa/kx of a well geometry.
inline double quantization_residual(const WellGeometry& g) {
    return std::tan(g.kx * g.q) - g.kappa / g.kx;
}

/// Closed-form square-well basis for a symmetric bound level:
///     phi = N cos(kx x), theta = N sin(kx x)            for |x| <= q,
/// continued past +-q by matching value and slope (phi even, theta odd).
/// The geometry must satisfy the quantization condition; the residual test
/// rejects off-level energies, for which no bound pair of this form exists.
inline BasisSample eval_basis_well(double x, const WellGeometry& g, const Microstate& ms,
                                   const UnitSystem& units,
                                   WellThetaForm form = WellThetaForm::continuation,
                                   double quantization_tol = 1e-9) {
    validate_units(units);
    validate_microstate(ms);
    if (!(g.kx > 0.0) || !(g.kappa > 0.0) || !(g.q > 0.0))
        throw std::invalid_argument("eval_basis_well: geometry must be positive");
    const double resid = quantization_residual(g);
    if (!(std::abs(resid) <= quantization_tol))
        throw std::invalid_argument("eval_basis_well: geometry fails the quantization residual test "
                                    "(tan(kx q) - kappa/kx = " + std::to_string(resid) + ")");
    const double N = detail::basis_prefactor(g.kx, ms, units);
    BasisSample out;
    out.x = x;
    if (std::abs(x) <= g.q) {
        out.phi = N * std::cos(g.kx * x);
        out.dphi = -N * g.kx * std::sin(g.kx * x);
        out.theta = N * std::sin(g.kx * x);
        out.dtheta = N * g.kx * std::cos(g.kx * x);
        return out;
    }
    const double xa = std::abs(x);
    const double xi = xa - g.q;
    const double ke = g.kappa * xi;
    if (ke > detail::max_tail_exponent) detail::throw_tail_overflow(x, ke);
    const detail::WellTailCoef w = detail::well_tail_coef(g, form);
    const double ep = std::exp(ke), em = std::exp(-ke);
    const double phi = N * (w.Gp * ep + w.Fp * em);
    const double dphi = N * g.kappa * (w.Gp * ep - w.Fp * em);
    const double th = N * (w.At * ep + w.Bt * em);
    const double dth = N * g.kappa * (w.At * ep - w.Bt * em);
    out.phi = phi;
    out.theta = th;
    out.dphi = dphi;
    out.dtheta = dth;
    if (x < 0.0) {  // phi even, theta odd
        out.dphi = -dphi;
        out.theta = -th;
    }
    return out;
}

}  // namespace qhj
