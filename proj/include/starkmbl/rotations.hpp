#pragma once

#include <cmath>

#include "starkmbl/chain.hpp"

namespace starkmbl {

enum class Axis { x, y, z };

/// In-place exp(-i angle/2 sigma_axis) on one site (1-based). Exactly
/// norm-preserving.
inline void rotate_site_inplace(StateVector& psi, int site, Axis axis, double angle) {
    if (site < 1 || site > psi.n) throw config_error("rotate_site: invalid site");
    const basis_t mask = basis_t{1} << (site - 1);
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);

    if (axis == Axis::z) {
        const cplx up = std::polar(1.0, -0.5 * angle);
        const cplx dn = std::polar(1.0, +0.5 * angle);
        for (basis_t b = 0; b < psi.dim(); ++b) psi.amps[b] *= (b & mask) ? up : dn;
        return;
    }
    for (basis_t b = 0; b < psi.dim(); ++b) {
        if (b & mask) continue; // visit each (down, up) pair once
        const basis_t bu = b | mask;
        const cplx a_dn = psi.amps[b];
        const cplx a_up = psi.amps[bu];
        if (axis == Axis::x) {
            const cplx is{0.0, s};
            psi.amps[bu] = c * a_up - is * a_dn;
            psi.amps[b] = c * a_dn - is * a_up;
        } else { // y
            psi.amps[bu] = c * a_up - s * a_dn;
            psi.amps[b] = c * a_dn + s * a_up;
        }
    }
}

inline StateVector rotate_site(StateVector psi, int site, Axis axis, double angle) {
    rotate_site_inplace(psi, site, axis, angle);
    return psi;
}

/// The same rotation on every site.
inline void rotate_global_inplace(StateVector& psi, Axis axis, double angle) {
    for (int j = 1; j <= psi.n; ++j) rotate_site_inplace(psi, j, axis, angle);
}

inline StateVector rotate_global(StateVector psi, Axis axis, double angle) {
    rotate_global_inplace(psi, axis, angle);
    return psi;
}

} // namespace starkmbl
