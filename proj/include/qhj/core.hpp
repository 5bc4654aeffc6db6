#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

/// Core value types for the trajectory representation of reflection by
/// semi-infinite rectangular barriers, square wells, and square-well ducts:
/// unit system, microstate coefficient triples, scenario descriptions, and
/// the wavenumber pairs derived from them.
///
/// Conventions used throughout the library:
///   k_x^2 = 2 m E_x / hbar^2        (propagating wavenumber)
///   kappa^2 = 2 m (U - E_x) / hbar^2 (evanescent decay constant)
///   r = kappa / k_x
/// A microstate is the coefficient triple (a, b, c) of the positive quadratic
/// form a*phi^2 + b*theta^2 + c*phi*theta built on the normalized basis pair
/// (phi, theta); positivity requires a > 0, b > 0 and a*b - c^2/4 > 0.
namespace qhj {

/// Planck constant (reduced) and particle mass. Natural units hbar = m = 1
/// by default; every entry point accepts an explicit override.
struct UnitSystem {
    double hbar = 1.0;
    double mass = 1.0;
};

inline void validate_units(const UnitSystem& u) {
    if (!(u.hbar > 0.0) || !std::isfinite(u.hbar))
        throw std::invalid_argument("UnitSystem: hbar must be positive and finite, got " +
                                    std::to_string(u.hbar));
    if (!(u.mass > 0.0) || !std::isfinite(u.mass))
        throw std::invalid_argument("UnitSystem: mass must be positive and finite, got " +
                                    std::to_string(u.mass));
}

/// Coefficient triple of the bilinear form defining one microstate.
struct Microstate {
    double a = 1.0;
    double b = 1.0;
    double c = 0.0;
};

/// Relative guard band on the positive-definiteness margin a*b - c^2/4.
inline constexpr double microstate_guard_band = 1e-12;

/// a*b - c^2/4, the determinant of the quadratic form (times 1).
inline double microstate_margin(const Microstate& ms) {
    return ms.a * ms.b - 0.25 * ms.c * ms.c;
}

/// Throws std::invalid_argument naming the first violated constraint.
/// The positivity margin is tested against a relative guard band so that
/// triples within rounding distance of degeneracy are rejected.
inline void validate_microstate(const Microstate& ms) {
    if (!std::isfinite(ms.a) || !std::isfinite(ms.b) || !std::isfinite(ms.c))
        throw std::invalid_argument("Microstate: coefficients must be finite");
    if (!(ms.a > 0.0))
        throw std::invalid_argument("Microstate: coefficient a must be positive, got a = " +
                                    std::to_string(ms.a));
    if (!(ms.b > 0.0))
        throw std::invalid_argument("Microstate: coefficient b must be positive, got b = " +
                                    std::to_string(ms.b));
    const double margin = microstate_margin(ms);
    const double scale = ms.a * ms.b + 0.25 * ms.c * ms.c;
    if (!(margin > microstate_guard_band * scale))
        throw std::invalid_argument(
            "Microstate: a*b - c^2/4 must be positive (margin " + std::to_string(margin) +
            " below guard band for a = " + std::to_string(ms.a) + ", b = " + std::to_string(ms.b) +
            ", c = " + std::to_string(ms.c) + ")");
}

/// Propagating / evanescent wavenumber pair for one scenario.
struct Wavenumbers {
    double kx = 0.0;
    double kappa = 0.0;
};

/// Normal incidence on the semi-infinite barrier V(x) = U * step(x).
struct BarrierScenario {
    double U = 1.0;   ///< barrier height, U > 0
    double Ex = 0.5;  ///< kinetic energy of the normal motion, 0 < Ex < U
    UnitSystem units{};
};

/// Oblique incidence on the same barrier: total energy E shared between the
/// normal motion and a conserved transverse momentum hbar*ky.
struct ObliqueScenario {
    double U = 1.0;
    double E = 0.5;
    double ky = 0.0;
    UnitSystem units{};
};

/// Symmetric square well V(x) = -U for |x| < q (equivalently, a well of depth
/// U between two semi-infinite barriers). Bound levels are indexed by the
/// symmetric-state quantum number n >= 0; the level energy is always derived
/// from the quantization condition tan(kx q) = kappa/kx and never stored.
struct WellScenario {
    double U = 1.0;
    double q = 1.0;
    int level = 0;
    UnitSystem units{};
};

/// Square-well duct: the well of WellScenario extruded along y with a free
/// transverse momentum hbar*ky.
struct DuctScenario {
    WellScenario well{};
    double ky = 0.0;
};

inline void validate_scenario(const BarrierScenario& s) {
    validate_units(s.units);
    if (!(s.U > 0.0) || !std::isfinite(s.U))
        throw std::invalid_argument("BarrierScenario: U must be positive and finite, got " +
                                    std::to_string(s.U));
    if (!(s.Ex > 0.0))
        throw std::invalid_argument("BarrierScenario: Ex must be positive, got " +
                                    std::to_string(s.Ex));
    if (!(s.Ex < s.U))
        throw std::invalid_argument("BarrierScenario: Ex must lie below the barrier height U (Ex = " +
                                    std::to_string(s.Ex) + ", U = " + std::to_string(s.U) + ")");
}

inline void validate_scenario(const ObliqueScenario& s) {
    validate_units(s.units);
    if (!(s.U > 0.0) || !std::isfinite(s.U))
        throw std::invalid_argument("ObliqueScenario: U must be positive and finite, got " +
                                    std::to_string(s.U));
    if (!std::isfinite(s.E) || !std::isfinite(s.ky))
        throw std::invalid_argument("ObliqueScenario: E and ky must be finite");
    const double h = s.units.hbar, m = s.units.mass;
    const double kx2 = 2.0 * m * s.E / (h * h) - s.ky * s.ky;
    if (!(kx2 > 0.0))
        throw std::invalid_argument(
            "ObliqueScenario: normal wavenumber is not real and positive "
            "(2 m E / hbar^2 - ky^2 = " + std::to_string(kx2) + ")");
    const double kap2 = 2.0 * m * (s.U - s.E) / (h * h) + s.ky * s.ky;
    if (!(kap2 > 0.0))
        throw std::invalid_argument(
            "ObliqueScenario: evanescent decay constant is not real and positive "
            "(2 m (U - E) / hbar^2 + ky^2 = " + std::to_string(kap2) + ")");
}

/// Number of symmetric bound levels the well admits: all n with
/// n*pi < sqrt(2 m U) q / hbar (strict).
inline int admissible_level_count(double U, double q, const UnitSystem& units) {
    const double kmax_q = std::sqrt(2.0 * units.mass * U) * q / units.hbar;
    // #{n >= 0 : n < ratio} = ceil(ratio), the strict inequality excluding an
    // exact-integer edge by itself.
    return static_cast<int>(std::ceil(kmax_q / M_PI));
}

inline void validate_scenario(const WellScenario& s) {
    validate_units(s.units);
    if (!(s.U > 0.0) || !std::isfinite(s.U))
        throw std::invalid_argument("WellScenario: U must be positive and finite, got " +
                                    std::to_string(s.U));
    if (!(s.q > 0.0) || !std::isfinite(s.q))
        throw std::invalid_argument("WellScenario: q must be positive and finite, got " +
                                    std::to_string(s.q));
    if (s.level < 0)
        throw std::invalid_argument("WellScenario: level index must be non-negative, got " +
                                    std::to_string(s.level));
    const int count = admissible_level_count(s.U, s.q, s.units);
    if (s.level >= count)
        throw std::invalid_argument(
            "WellScenario: level " + std::to_string(s.level) + " is not admissible (" +
            std::to_string(count) + " symmetric level(s) satisfy n*pi < sqrt(2 m U) q / hbar)");
}

inline void validate_scenario(const DuctScenario& s) {
    validate_scenario(s.well);
    if (!std::isfinite(s.ky))
        throw std::invalid_argument("DuctScenario: ky must be finite");
}

/// Wavenumbers of the normal-incidence barrier problem.
inline Wavenumbers derive_wavenumbers(const BarrierScenario& s) {
    validate_scenario(s);
    const double h = s.units.hbar, m = s.units.mass;
    return {std::sqrt(2.0 * m * s.Ex) / h, std::sqrt(2.0 * m * (s.U - s.Ex)) / h};
}

/// Wavenumbers of the oblique problem; kx and kappa both pick up the
/// transverse momentum, preserving hbar^2 (kx^2 + kappa^2) = 2 m U.
inline Wavenumbers derive_wavenumbers(const ObliqueScenario& s) {
    validate_scenario(s);
    const double h = s.units.hbar, m = s.units.mass;
    const double kx2 = 2.0 * m * s.E / (h * h) - s.ky * s.ky;
    const double kap2 = 2.0 * m * (s.U - s.E) / (h * h) + s.ky * s.ky;
    return {std::sqrt(kx2), std::sqrt(kap2)};
}

/// Normal-motion energy of the oblique problem, E - hbar^2 ky^2 / (2m).
inline double normal_energy(const ObliqueScenario& s) {
    const double h = s.units.hbar;
    return s.E - h * h * s.ky * s.ky / (2.0 * s.units.mass);
}

}  // namespace qhj
