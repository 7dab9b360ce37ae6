#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "starkmbl/errors.hpp"

namespace starkmbl {

using cplx = std::complex<double>;
using basis_t = std::uint64_t;

/// Spin-1/2 chain of n sites. Basis convention, used everywhere: site j
/// (1-based) lives in bit (j-1) of the basis index; a set bit is spin up
/// (sigma^z = +1). Dynamics are limited to n <= 20 (dense 2^n amplitudes).
struct ChainConfig {
    int n = 0;

    explicit ChainConfig(int sites) : n(sites) {
        if (n < 2 || n > 20)
            throw config_error("chain size must be in [2, 20], got " + std::to_string(n));
    }
    basis_t dimension() const { return basis_t{1} << n; }
};

/// Product-state pattern over {0,1}; leftmost character is site 1,
/// '1' = up, '0' = down.
struct SpinPattern {
    std::string bits;

    SpinPattern() = default;
    explicit SpinPattern(std::string b) : bits(std::move(b)) {
        for (char c : bits)
            if (c != '0' && c != '1')
                throw config_error("spin pattern may contain only '0'/'1', got \"" + bits + "\"");
    }

    int size() const { return static_cast<int>(bits.size()); }

    void validate_for(int n) const {
        if (size() != n)
            throw config_error("spin pattern \"" + bits + "\" has length " +
                               std::to_string(size()) + ", chain has " + std::to_string(n) +
                               " sites");
    }

    bool up(int site) const { return bits[static_cast<std::size_t>(site - 1)] == '1'; }

    /// Basis index of the encoded configuration.
    basis_t index() const {
        basis_t b = 0;
        for (int j = 1; j <= size(); ++j)
            if (up(j)) b |= basis_t{1} << (j - 1);
        return b;
    }

    int popcount() const { return static_cast<int>(std::popcount(index())); }
    int magnetization() const { return 2 * popcount() - size(); }
    bool fully_polarized() const { return popcount() == 0 || popcount() == size(); }

    /// "0101..." (site 1 down).
    static SpinPattern neel(int n) {
        std::string s(static_cast<std::size_t>(n), '0');
        for (int j = 1; j < n; j += 2) s[static_cast<std::size_t>(j)] = '1';
        return SpinPattern(s);
    }
    /// "01100110..." (period-4 double domain wall).
    static SpinPattern two_block(int n) {
        static constexpr char unit[] = "0110";
        std::string s;
        for (int j = 0; j < n; ++j) s.push_back(unit[j % 4]);
        return SpinPattern(s);
    }
    /// "000111000111..." (period-6 triple blocks).
    static SpinPattern three_block(int n) {
        static constexpr char unit[] = "000111";
        std::string s;
        for (int j = 0; j < n; ++j) s.push_back(unit[j % 6]);
        return SpinPattern(s);
    }
};

/// Complex amplitudes over the 2^n computational basis.
struct StateVector {
    int n = 0;
    std::vector<cplx> amps;

    StateVector() = default;
    StateVector(int sites, std::vector<cplx> a) : n(sites), amps(std::move(a)) {}
    static StateVector zero(int sites) {
        return StateVector(sites, std::vector<cplx>(basis_t{1} << sites, cplx{0.0, 0.0}));
    }

    basis_t dim() const { return amps.size(); }

    double norm() const {
        double s = 0.0;
        for (const cplx& a : amps) s += std::norm(a);
        return std::sqrt(s);
    }
    void normalize() {
        const double nn = norm();
        if (nn <= 0.0) throw numeric_error("cannot normalize a zero state");
        for (cplx& a : amps) a /= nn;
    }
};

/// Sigma^z of site j (1-based) in basis state b: +1 or -1.
inline int sz_of(basis_t b, int site) { return (b >> (site - 1)) & 1 ? 1 : -1; }

/// Total magnetization sum_j <sigma^z_j> of a basis state: 2*popcount - n.
inline int magnetization_of_index(basis_t b, int n) {
    if (n < 1 || b >= (basis_t{1} << n))
        throw config_error("basis index " + std::to_string(b) + " out of range for n = " +
                           std::to_string(n));
    return 2 * static_cast<int>(std::popcount(b)) - n;
}

/// |pattern> as a state vector: a single unit amplitude.
inline StateVector product_state(const SpinPattern& pattern) {
    const int n = pattern.size();
    if (n < 1 || n > 20) throw config_error("pattern length out of range [1, 20]");
    StateVector psi = StateVector::zero(n);
    psi.amps[pattern.index()] = cplx{1.0, 0.0};
    return psi;
}

/// Ascending basis indices of the fixed-magnetization sector. mz must have
/// the parity of n and |mz| <= n, else the sector is empty.
inline std::vector<basis_t> sector_indices(int n, int mz) {
    if (std::abs(mz) > n || ((n + mz) % 2) != 0)
        throw config_error("empty magnetization sector: n = " + std::to_string(n) +
                           ", mz = " + std::to_string(mz));
    const int ups = (n + mz) / 2;
    std::vector<basis_t> out;
    const basis_t dim = basis_t{1} << n;
    for (basis_t b = 0; b < dim; ++b)
        if (static_cast<int>(std::popcount(b)) == ups) out.push_back(b);
    return out;
}

} // namespace starkmbl
