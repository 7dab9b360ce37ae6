#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "starkmbl/chain.hpp"
#include "starkmbl/couplings.hpp"
#include "starkmbl/fields.hpp"

namespace starkmbl {

struct OffDiagEntry {
    basis_t row; // row < col; Hermitian completion implied
    basis_t col;
    double value;
};

/// Matrix-free descriptor of a sigma^x sigma^x coupling network on the full
/// 2^n basis: each pair contributes value J on every double-bit-flip edge.
struct IsingKernel {
    struct FlipPair {
        basis_t mask;
        double j;
    };
    std::vector<FlipPair> pairs;
};

/// When to skip storing explicit off-diagonal entries for Eq.-1 operators.
inline constexpr int matrix_free_threshold = 12;

/// Hermitian operator with a real-symmetric sparse row layout and, for
/// full-basis Ising operators, a matrix-free apply path.
struct SparseOperator {
    basis_t dimension = 0;
    int sites = 0;                      // chain length n
    std::vector<double> diagonal;       // length = dimension
    std::vector<OffDiagEntry> offdiag;  // row < col, sorted
    bool stored = true;                 // offdiag holds all entries
    std::optional<IsingKernel> kernel;  // matrix-free path (full basis only)
    std::vector<basis_t> basis;         // sector basis labels; empty = full 2^n

    double trace() const {
        double t = 0.0;
        for (double d : diagonal) t += d;
        return t;
    }

    void apply_stored(std::span<const cplx> in, std::span<cplx> out) const {
        for (basis_t b = 0; b < dimension; ++b) out[b] = diagonal[b] * in[b];
        for (const OffDiagEntry& e : offdiag) {
            out[e.row] += e.value * in[e.col];
            out[e.col] += e.value * in[e.row];
        }
    }

    void apply_kernel(std::span<const cplx> in, std::span<cplx> out) const {
        for (basis_t b = 0; b < dimension; ++b) out[b] = diagonal[b] * in[b];
        for (const IsingKernel::FlipPair& p : kernel->pairs)
            for (basis_t b = 0; b < dimension; ++b) out[b] += p.j * in[b ^ p.mask];
    }

    /// out = H * in (unnormalized image).
    void apply(std::span<const cplx> in, std::span<cplx> out) const {
        if (in.size() != dimension || out.size() != dimension)
            throw config_error("apply: dimension mismatch");
        if (stored)
            apply_stored(in, out);
        else if (kernel)
            apply_kernel(in, out);
        else
            throw config_error("apply: operator has neither stored entries nor a kernel");
    }

    StateVector apply(const StateVector& psi) const {
        if (psi.dim() != dimension) throw config_error("apply: dimension mismatch");
        StateVector out;
        out.n = psi.n;
        out.amps.resize(dimension);
        apply(psi.amps, out.amps);
        return out;
    }
};

/// Visit every off-diagonal entry (row < col) once.
template <class F>
void for_each_offdiag(const SparseOperator& op, F&& fn) {
    if (op.stored) {
        for (const OffDiagEntry& e : op.offdiag) fn(e.row, e.col, e.value);
        return;
    }
    if (!op.kernel) return;
    for (const IsingKernel::FlipPair& p : op.kernel->pairs)
        for (basis_t b = 0; b < op.dimension; ++b) {
            const basis_t bp = b ^ p.mask;
            if (b < bp) fn(b, bp, p.j);
        }
}

enum class OperatorStorage { automatic, stored, matrix_free };

/// H = sum_{j<j'} J_{jj'} sigma^x_j sigma^x_j' + sum_j bz_j sigma^z_j on the
/// full 2^n basis.
inline SparseOperator build_ising(const CouplingMatrix& c, const FieldProfile& f,
                                  OperatorStorage storage = OperatorStorage::automatic) {
    if (c.n != f.n()) throw config_error("build_ising: coupling/field dimension mismatch");
    const int n = c.n;
    if (n < 1 || n > 20) throw config_error("build_ising: n must be in [1, 20]");
    SparseOperator op;
    op.dimension = basis_t{1} << n;
    op.sites = n;
    op.diagonal.resize(op.dimension);
    for (basis_t b = 0; b < op.dimension; ++b) {
        double d = 0.0;
        for (int j = 1; j <= n; ++j) d += f.at(j) * sz_of(b, j);
        op.diagonal[b] = d;
    }

    IsingKernel kernel;
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b)
            if (c.at(a, b) != 0.0)
                kernel.pairs.push_back({(basis_t{1} << (a - 1)) | (basis_t{1} << (b - 1)),
                                        c.at(a, b)});
    op.kernel = std::move(kernel);

    const bool want_stored = storage == OperatorStorage::stored ||
                             (storage == OperatorStorage::automatic && n < matrix_free_threshold);
    op.stored = want_stored;
    if (want_stored) {
        op.offdiag.reserve(op.kernel->pairs.size() * op.dimension / 2);
        for (const IsingKernel::FlipPair& p : op.kernel->pairs)
            for (basis_t b = 0; b < op.dimension; ++b) {
                const basis_t bp = b ^ p.mask;
                if (b < bp) op.offdiag.push_back({b, bp, p.j});
            }
        std::sort(op.offdiag.begin(), op.offdiag.end(), [](const auto& x, const auto& y) {
            return x.row != y.row ? x.row < y.row : x.col < y.col;
        });
    }
    return op;
}

/// H_XY = sum_{j<j'} (J_{jj'}/2)(sigma^+_j sigma^-_j' + h.c.) + sum_j bz_j
/// sigma^z_j restricted to the magnetization-mz sector.
inline SparseOperator build_xy_sector(const CouplingMatrix& c, const FieldProfile& f, int mz) {
    if (c.n != f.n()) throw config_error("build_xy_sector: coupling/field dimension mismatch");
    const int n = c.n;
    std::vector<basis_t> sector = sector_indices(n, mz);

    SparseOperator op;
    op.dimension = sector.size();
    op.sites = n;
    op.basis = sector;
    op.diagonal.resize(op.dimension);

    std::unordered_map<basis_t, basis_t> pos;
    pos.reserve(sector.size());
    for (basis_t i = 0; i < sector.size(); ++i) pos.emplace(sector[i], i);

    for (basis_t i = 0; i < op.dimension; ++i) {
        const basis_t b = sector[i];
        double d = 0.0;
        for (int j = 1; j <= n; ++j) d += f.at(j) * sz_of(b, j);
        op.diagonal[i] = d;
    }
    for (int a = 1; a <= n; ++a)
        for (int b2 = a + 1; b2 <= n; ++b2) {
            if (c.at(a, b2) == 0.0) continue;
            const basis_t mask = (basis_t{1} << (a - 1)) | (basis_t{1} << (b2 - 1));
            for (basis_t i = 0; i < op.dimension; ++i) {
                const basis_t b = sector[i];
                if (sz_of(b, a) == sz_of(b, b2)) continue; // hop needs one up, one down
                const basis_t bp = b ^ mask;
                if (b < bp) op.offdiag.push_back({i, pos.at(bp), 0.5 * c.at(a, b2)});
            }
        }
    std::sort(op.offdiag.begin(), op.offdiag.end(), [](const auto& x, const auto& y) {
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    return op;
}

/// Principal submatrix on a subset of row indices (ascending). The result is
/// always stored-sparse; used for symmetry-resolved spectra.
inline SparseOperator restrict_to_indices(const SparseOperator& op,
                                          std::span<const basis_t> rows) {
    SparseOperator sub;
    sub.dimension = rows.size();
    sub.sites = op.sites;
    sub.basis.assign(rows.begin(), rows.end());
    sub.diagonal.resize(sub.dimension);
    std::unordered_map<basis_t, basis_t> pos;
    pos.reserve(rows.size());
    for (basis_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= op.dimension) throw config_error("restrict_to_indices: index out of range");
        pos.emplace(rows[i], i);
        sub.diagonal[i] = op.diagonal[rows[i]];
    }
    for_each_offdiag(op, [&](basis_t r, basis_t c2, double v) {
        auto ir = pos.find(r);
        auto ic = pos.find(c2);
        if (ir != pos.end() && ic != pos.end()) {
            basis_t a = ir->second, b = ic->second;
            if (a > b) std::swap(a, b);
            sub.offdiag.push_back({a, b, v});
        }
    });
    std::sort(sub.offdiag.begin(), sub.offdiag.end(), [](const auto& x, const auto& y) {
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    return sub;
}

} // namespace starkmbl
