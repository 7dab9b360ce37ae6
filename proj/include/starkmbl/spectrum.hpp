#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "starkmbl/operators.hpp"

namespace starkmbl {

namespace detail {

/// Connected components of the basis graph induced by nonzero off-diagonal
/// entries. The operator is exactly block-diagonal on these groups, so the
/// full spectrum is the union of the per-block spectra.
inline std::vector<std::vector<basis_t>> irreducible_blocks(const SparseOperator& op) {
    std::vector<basis_t> parent(op.dimension);
    std::iota(parent.begin(), parent.end(), basis_t{0});
    auto find = [&](basis_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for_each_offdiag(op, [&](basis_t r, basis_t c, double v) {
        if (v == 0.0) return;
        const basis_t a = find(r), b = find(c);
        if (a != b) parent[a] = b;
    });
    std::vector<std::vector<basis_t>> blocks;
    std::unordered_map<basis_t, std::size_t> block_of;
    for (basis_t b = 0; b < op.dimension; ++b) {
        const basis_t root = find(b);
        auto [it, inserted] = block_of.emplace(root, blocks.size());
        if (inserted) blocks.emplace_back();
        blocks[it->second].push_back(b);
    }
    return blocks;
}

inline Eigen::MatrixXd dense_block(const SparseOperator& op, std::span<const basis_t> rows) {
    std::unordered_map<basis_t, Eigen::Index> pos;
    pos.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        pos.emplace(rows[i], static_cast<Eigen::Index>(i));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = op.diagonal[rows[i]];
    for_each_offdiag(op, [&](basis_t r, basis_t c, double v) {
        auto ir = pos.find(r);
        if (ir == pos.end()) return;
        auto ic = pos.find(c);
        if (ic == pos.end()) return;
        m(ir->second, ic->second) += v;
        m(ic->second, ir->second) += v;
    });
    return m;
}

} // namespace detail

/// Full real spectrum, ascending. Dimension is guarded at 2^14. Exact
/// symmetry blocks are diagonalized separately and merged; the reconstruction
/// check sum(eigenvalues) == trace holds to 1e-6 * dimension.
inline std::vector<double> dense_eigenvalues(const SparseOperator& op) {
    if (op.dimension > (basis_t{1} << 14))
        throw resource_error("dense_eigenvalues: dimension " + std::to_string(op.dimension) +
                             " exceeds the 2^14 guard");
    if (op.dimension == 0) throw config_error("dense_eigenvalues: empty operator");

    std::vector<double> eigs;
    eigs.reserve(op.dimension);
    for (const auto& block : detail::irreducible_blocks(op)) {
        if (block.size() == 1) {
            eigs.push_back(op.diagonal[block.front()]);
            continue;
        }
        const Eigen::MatrixXd m = detail::dense_block(op, block);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw numeric_error("dense_eigenvalues: eigensolver failed");
        const auto& w = solver.eigenvalues();
        eigs.insert(eigs.end(), w.data(), w.data() + w.size());
    }
    std::sort(eigs.begin(), eigs.end());

    const double sum = std::accumulate(eigs.begin(), eigs.end(), 0.0);
    if (std::abs(sum - op.trace()) > 1e-6 * static_cast<double>(op.dimension))
        throw numeric_error("dense_eigenvalues: trace reconstruction check failed");
    return eigs;
}

struct GapRatios {
    std::vector<double> r;
    std::size_t excluded_degenerate = 0;
};

/// r_n = min(gap_n, gap_{n-1}) / max(gap_n, gap_{n-1}) over adjacent gaps of
/// the sorted spectrum. Pairs whose larger gap falls below degeneracy_tol are
/// excluded and counted (default tolerance: 1e-12 * spectral width).
inline GapRatios gap_ratios(std::span<const double> eigs, double degeneracy_tol = -1.0) {
    if (eigs.size() < 3) throw config_error("gap_ratios needs at least 3 eigenvalues");
    if (!std::is_sorted(eigs.begin(), eigs.end()))
        throw config_error("gap_ratios expects a sorted spectrum");
    if (degeneracy_tol < 0.0) degeneracy_tol = 1e-12 * (eigs.back() - eigs.front());

    GapRatios out;
    out.r.reserve(eigs.size() - 2);
    for (std::size_t i = 1; i + 1 < eigs.size(); ++i) {
        const double lo = eigs[i] - eigs[i - 1];
        const double hi = eigs[i + 1] - eigs[i];
        const double mx = std::max(lo, hi);
        if (mx < degeneracy_tol) {
            ++out.excluded_degenerate;
            continue;
        }
        out.r.push_back(std::min(lo, hi) / mx);
    }
    return out;
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw config_error("mean of empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Poisson-spectrum gap-ratio density P(r) = 2/(1+r)^2 on [0,1].
inline double poisson_pdf(double r) {
    if (r < 0.0 || r > 1.0) throw config_error("gap-ratio density defined on [0,1]");
    const double u = 1.0 + r;
    return 2.0 / (u * u);
}

/// Wigner-surmise (GOE) gap-ratio density P(r) = 27(r+r^2)/(4(1+r+r^2)^{5/2}).
inline double wigner_dyson_pdf(double r) {
    if (r < 0.0 || r > 1.0) throw config_error("gap-ratio density defined on [0,1]");
    const double u = 1.0 + r + r * r;
    return 27.0 * (r + r * r) / (4.0 * std::pow(u, 2.5));
}

enum class RefDistribution { poisson, wigner_dyson };

/// <r> of the reference density by composite-Simpson quadrature:
/// 2 ln 2 - 1 = 0.38629 (Poisson), 0.53590 (Wigner-Dyson surmise).
inline double mean_r_reference(RefDistribution kind) {
    const auto pdf = kind == RefDistribution::poisson ? poisson_pdf : wigner_dyson_pdf;
    const int segments = 20000; // even
    const double h = 1.0 / segments;
    double sum = 0.0 * pdf(0.0) + 1.0 * pdf(1.0);
    for (int i = 1; i < segments; ++i) {
        const double r = i * h;
        sum += (i % 2 ? 4.0 : 2.0) * r * pdf(r);
    }
    return sum * h / 3.0;
}

struct Histogram {
    std::vector<double> edges;   // n_bins + 1
    std::vector<double> density; // n_bins, integrates to 1
};

/// Density-normalized histogram of gap ratios on [0,1].
inline Histogram r_histogram(std::span<const double> rs, int n_bins) {
    if (n_bins < 2) throw config_error("r_histogram needs at least 2 bins");
    if (rs.empty()) throw config_error("r_histogram: empty sample");
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(n_bins) + 1);
    for (int i = 0; i <= n_bins; ++i)
        h.edges[static_cast<std::size_t>(i)] = static_cast<double>(i) / n_bins;
    h.density.assign(static_cast<std::size_t>(n_bins), 0.0);
    for (double r : rs) {
        if (r < 0.0 || r > 1.0) throw config_error("r_histogram: value outside [0,1]");
        int bin = std::min(static_cast<int>(r * n_bins), n_bins - 1);
        h.density[static_cast<std::size_t>(bin)] += 1.0;
    }
    const double w = 1.0 / n_bins;
    for (double& d : h.density) d /= static_cast<double>(rs.size()) * w;
    return h;
}

struct LevelStatsReport {
    std::vector<double> eigenvalues;
    std::vector<double> r_values;
    double mean_r = 0.0;
    Histogram histogram;
    std::size_t excluded_degenerate = 0;
};

struct LevelStatsOptions {
    int n_bins = 40;
    double inner_fraction = 1.0; // keep only this central fraction of levels
    double degeneracy_tol = -1.0;
};

inline LevelStatsReport level_stats_from_eigenvalues(std::vector<double> eigs,
                                                     const LevelStatsOptions& opt = {}) {
    LevelStatsReport rep;
    rep.eigenvalues = std::move(eigs);
    std::span<const double> window(rep.eigenvalues);
    if (opt.inner_fraction < 1.0) {
        if (opt.inner_fraction <= 0.0) throw config_error("inner_fraction must be in (0, 1]");
        const std::size_t keep = std::max<std::size_t>(
            3, static_cast<std::size_t>(opt.inner_fraction * rep.eigenvalues.size()));
        const std::size_t skip = (rep.eigenvalues.size() - keep) / 2;
        window = window.subspan(skip, keep);
    }
    GapRatios gr = gap_ratios(window, opt.degeneracy_tol);
    rep.r_values = std::move(gr.r);
    rep.excluded_degenerate = gr.excluded_degenerate;
    rep.mean_r = mean(rep.r_values);
    rep.histogram = r_histogram(rep.r_values, opt.n_bins);
    return rep;
}

inline LevelStatsReport level_stats(const SparseOperator& op, const LevelStatsOptions& opt = {}) {
    return level_stats_from_eigenvalues(dense_eigenvalues(op), opt);
}

} // namespace starkmbl
