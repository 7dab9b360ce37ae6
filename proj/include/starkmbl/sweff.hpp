#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "starkmbl/chain.hpp"
#include "starkmbl/couplings.hpp"

namespace starkmbl {

/// One dipole-conserving term of the third-order strong-tilt effective
/// Hamiltonian: amplitude * (sigma^+_i sigma^-_j sigma^-_k sigma^+_l + h.c.)
/// with i<j<k<l and i+l = j+k, amplitude in units of J0^3/g^2.
struct DipoleTerm {
    int i = 0, j = 0, k = 0, l = 0;
    double amplitude = 0.0;
};

/// Amplitude normalization: DipoleTerm carries the conventional closed-form
/// value. The bare matrix element <b|H_eff|a> between sigma^z configurations
/// of the tilted XY model (J/2 hops, sigma^z fields) is amplitude/48: the
/// closed form absorbs hop strength J instead of J/2 (factor 8), energy
/// denominators g*d instead of 2g*d (factor 4), and a 1/2 double-commutator
/// coefficient instead of 1/3 (factor 3/2).
inline constexpr double dipole_amplitude_per_coupling = 48.0;

namespace detail {

inline double dipole_amplitude_general(const CouplingMatrix& c, int i, int j, int k, int l,
                                       double g) {
    const double prod = c.at(i, j) * c.at(j, k) * c.at(j, l) + c.at(i, k) * c.at(j, k) * c.at(k, l) -
                        c.at(i, j) * c.at(i, k) * c.at(i, l) - c.at(i, l) * c.at(j, l) * c.at(k, l);
    return 3.0 * prod / ((j - i) * (k - i) * g * g);
}

inline double dipole_amplitude_power_law(double alpha, int i, int j, int k, int l, double g) {
    const double bracket =
        std::pow(static_cast<double>(k - j), -alpha) - std::pow(static_cast<double>(l - i), -alpha);
    return 6.0 * bracket /
           (g * g * std::pow(static_cast<double>(j - i), alpha + 1.0) *
            std::pow(static_cast<double>(k - i), alpha + 1.0));
}

template <class Amplitude>
std::vector<DipoleTerm> enumerate_terms(int n, double g, Amplitude&& amp) {
    if (!(g > 0.0)) throw config_error("heff3_terms: tilt g must be positive");
    std::vector<DipoleTerm> terms;
    for (int i = 1; i <= n - 3; ++i)
        for (int j = i + 1; j <= n - 2; ++j)
            for (int k = j + 1; k <= n - 1; ++k) {
                const int l = j + k - i; // dipole conservation
                if (l <= k || l > n) continue;
                terms.push_back({i, j, k, l, amp(i, j, k, l)});
            }
    return terms;
}

} // namespace detail

/// All dipole-conserving third-order terms for an explicit coupling matrix.
inline std::vector<DipoleTerm> heff3_terms(const CouplingMatrix& c, double g) {
    return detail::enumerate_terms(
        c.n, g, [&](int i, int j, int k, int l) { return detail::dipole_amplitude_general(c, i, j, k, l, g); });
}

/// The same terms from the power-law closed form; agrees with the matrix
/// route to 1e-10 when the matrix is exactly power-law.
inline std::vector<DipoleTerm> heff3_terms_power_law(int n, double alpha, double g) {
    if (!(alpha > 0.0)) throw config_error("heff3_terms: alpha must be positive");
    return detail::enumerate_terms(n, g, [&](int i, int j, int k, int l) {
        return detail::dipole_amplitude_power_law(alpha, i, j, k, l, g);
    });
}

struct MatrixElement {
    double amplitude = 0.0;             // units of J0^3/g^2, closed-form normalization
    bool quantum_numbers_match = false; // same magnetization and dipole moment
};

inline long dipole_moment(const SpinPattern& p) {
    long d = 0;
    for (int j = 1; j <= p.size(); ++j) d += static_cast<long>(j) * (p.up(j) ? 1 : -1);
    return d;
}

/// Total amplitude connecting two configurations through the term list. A
/// magnetization or dipole mismatch is flagged and returns zero; equal
/// patterns return zero (the terms are purely off-diagonal).
inline MatrixElement effective_matrix_element(const SpinPattern& a, const SpinPattern& b,
                                              std::span<const DipoleTerm> terms) {
    if (a.size() != b.size())
        throw config_error("effective_matrix_element: pattern length mismatch");
    MatrixElement out;
    if (a.magnetization() != b.magnetization() || dipole_moment(a) != dipole_moment(b))
        return out; // flagged zero
    out.quantum_numbers_match = true;
    if (a.bits == b.bits) return out;

    std::vector<int> flipped;
    for (int j = 1; j <= a.size(); ++j)
        if (a.up(j) != b.up(j)) flipped.push_back(j);
    if (flipped.size() != 4) return out;

    const int i = flipped[0], j = flipped[1], k = flipped[2], l = flipped[3];
    if (i + l != j + k) return out;
    // sigma^+_i sigma^-_j sigma^-_k sigma^+_l needs (down, up, up, down) in a,
    // or the h.c. direction
    const bool forward = !a.up(i) && a.up(j) && a.up(k) && !a.up(l);
    const bool backward = a.up(i) && !a.up(j) && !a.up(k) && a.up(l);
    if (!forward && !backward) return out;
    for (const DipoleTerm& t : terms)
        if (t.i == i && t.j == j && t.k == k && t.l == l) out.amplitude += t.amplitude;
    return out;
}

} // namespace starkmbl
