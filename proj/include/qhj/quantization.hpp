#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhj/basis.hpp"
#include "qhj/core.hpp"

/// Bound-state quantization for the symmetric square well of depth U and
/// half-width q: even/odd levels interleave as roots of
///     tan(kx q) = kappa/kx,   kappa = sqrt(2 m U / hbar^2 - kx^2),
/// one per branch kx q in (n pi, n pi + pi/2) while n pi < sqrt(2 m U) q / hbar.
namespace qhj {

/// One resolved level. `residual` is tan(kx q) - kappa/kx at the root.
struct BoundLevel {
    int n = 0;
    double kx = 0.0;
    double kappa = 0.0;
    double Ex = 0.0;
    double q = 0.0;
    double residual = 0.0;
};

inline WellGeometry well_geometry(const BoundLevel& lv) { return {lv.kx, lv.kappa, lv.q}; }

namespace detail {

/// Pole-free level function g(k) = k sin(k q) - kappa(k) cos(k q); its roots
/// on each branch coincide with those of tan(k q) = kappa/k.
inline double level_function(double k, double q, double kmax) {
    const double kap = std::sqrt(std::max(0.0, (kmax - k) * (kmax + k)));
    return k * std::sin(k * q) - kap * std::cos(k * q);
}

}  // namespace detail

/// Solve level n of the well; throws std::domain_error when the level does
/// not exist (n pi >= sqrt(2 m U) q / hbar).
inline BoundLevel solve_level(double U, double q, int n, const UnitSystem& units = {}) {
    validate_units(units);
    if (!(U > 0.0) || !(q > 0.0))
        throw std::invalid_argument("solve_level: U and q must be positive");
    if (n < 0) throw std::invalid_argument("solve_level: level index must be nonnegative");
    const double kmax = std::sqrt(2.0 * units.mass * U) / units.hbar;
    const int count = admissible_level_count(U, q, units);
    if (n >= count)
        throw std::domain_error("solve_level: level " + std::to_string(n) + " does not exist (well "
                                "holds " + std::to_string(count) + " levels)");

    const double eps = 1e-13 * kmax;
    double lo = n * M_PI / q + eps;
    double hi = std::min((n + 0.5) * M_PI / q, kmax) - eps;
    // g carries the branch parity (-1)^n: negative at lo, positive at hi.
    const double parity = (n % 2 == 0) ? 1.0 : -1.0;
    double glo = parity * detail::level_function(lo, q, kmax);
    double ghi = parity * detail::level_function(hi, q, kmax);
    if (!(glo < 0.0) || !(ghi > 0.0))
        throw std::domain_error("solve_level: root bracket failed for level " + std::to_string(n));
    for (int it = 0; it < 200 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = parity * detail::level_function(mid, q, kmax);
        if (gm <= 0.0) { lo = mid; glo = gm; } else { hi = mid; ghi = gm; }
    }
    // Linear interpolation over the terminal bracket sharpens the last bit.
    const double k = (glo == ghi) ? 0.5 * (lo + hi) : lo + (hi - lo) * (-glo) / (ghi - glo);

    BoundLevel lv;
    lv.n = n;
    lv.kx = k;
    lv.kappa = std::sqrt(std::max(0.0, (kmax - k) * (kmax + k)));
    lv.Ex = 0.5 * units.hbar * units.hbar * k * k / units.mass;
    lv.q = q;
    lv.residual = std::tan(k * q) - lv.kappa / k;
    return lv;
}

inline BoundLevel solve_level(const WellScenario& scen) {
    validate_scenario(scen);
    return solve_level(scen.U, scen.q, scen.level, scen.units);
}

/// All bound levels of the well, in increasing energy.
inline std::vector<BoundLevel> symmetric_levels(double U, double q, const UnitSystem& units = {}) {
    const int count = admissible_level_count(U, q, units);
    std::vector<BoundLevel> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) out.push_back(solve_level(U, q, n, units));
    return out;
}

/// Action variable of level n over a full libration,
///     J = oint p dx = 2 [W(X) - W(-X)],
/// evaluated at a turnaround depth X = q + pad/kappa large enough that the
/// tail phase has saturated. Equals (2 n + 1) h independent of microstate.
inline double action_variable(const BoundLevel& lv, const Microstate& ms,
                              const UnitSystem& units = {}, double pad = 40.0) {
    validate_units(units);
    const detail::MsForm f = detail::ms_form(ms);
    const WellGeometry g = well_geometry(lv);
    const double X = g.q + pad / g.kappa;
    return 2.0 * units.hbar * (detail::well_W_reduced(X, g, f) - detail::well_W_reduced(-X, g, f));
}

}  // namespace qhj
