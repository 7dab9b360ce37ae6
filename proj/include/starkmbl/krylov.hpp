#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

#include "starkmbl/operators.hpp"

namespace starkmbl {

struct KrylovSettings {
    int subspace_dim = 30;
    double tolerance = 1e-10;
    double max_substep = 0.1; // tJ0

    void validate() const {
        if (subspace_dim < 2) throw config_error("krylov subspace_dim must be >= 2");
        if (!(tolerance > 0.0)) throw config_error("krylov tolerance must be positive");
        if (!(max_substep > 0.0)) throw config_error("krylov max_substep must be positive");
    }
};

namespace detail {

/// exp(-i t T) e1 for the real symmetric tridiagonal T given by (alpha, beta).
inline Eigen::VectorXcd tridiag_exp_e1(std::span<const double> alpha,
                                       std::span<const double> beta, double t) {
    const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) tmat(i, i) = alpha[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        tmat(i, i + 1) = beta[static_cast<std::size_t>(i)];
        tmat(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tmat);
    Eigen::VectorXcd weights(m);
    for (Eigen::Index i = 0; i < m; ++i)
        weights(i) = std::polar(1.0, -es.eigenvalues()(i) * t) * es.eigenvectors()(0, i);
    return es.eigenvectors() * weights;
}

/// One Lanczos exp(-iHt) step with full reorthogonalization. Returns false
/// when the residual estimate is still above tol at the subspace limit.
inline bool lanczos_step(const SparseOperator& h, std::vector<cplx>& psi, double dt,
                         const KrylovSettings& s, std::vector<std::vector<cplx>>& vspace,
                         std::vector<cplx>& w) {
    const basis_t dim = h.dimension;
    const int m_max = std::min<int>(s.subspace_dim, static_cast<int>(dim));

    vspace.assign(1, psi);
    std::vector<double> alpha, beta;
    w.assign(dim, cplx{});

    bool converged = false;
    int m = 0;
    for (int j = 0; j < m_max; ++j) {
        const auto& vj = vspace[static_cast<std::size_t>(j)];
        h.apply(vj, w);
        cplx diag{0.0, 0.0};
        for (basis_t b = 0; b < dim; ++b) diag += std::conj(vj[b]) * w[b];
        alpha.push_back(diag.real());
        m = j + 1;

        for (basis_t b = 0; b < dim; ++b) w[b] -= alpha.back() * vj[b];
        if (j > 0) {
            const auto& vp = vspace[static_cast<std::size_t>(j - 1)];
            const double bp = beta.back();
            for (basis_t b = 0; b < dim; ++b) w[b] -= bp * vp[b];
        }
        for (int i = 0; i <= j; ++i) {
            const auto& vi = vspace[static_cast<std::size_t>(i)];
            cplx c{0.0, 0.0};
            for (basis_t b = 0; b < dim; ++b) c += std::conj(vi[b]) * w[b];
            for (basis_t b = 0; b < dim; ++b) w[b] -= c * vi[b];
        }

        double bj = 0.0;
        for (const cplx& a : w) bj += std::norm(a);
        bj = std::sqrt(bj);
        if (bj < 1e-13 * std::max(1.0, std::abs(alpha.back()))) {
            converged = true; // Krylov space exhausted: projection is exact
            break;
        }

        // residual estimate: last component of the exponential of the
        // extended (j+2)-dim tridiagonal matrix
        std::vector<double> ea(alpha);
        ea.push_back(alpha.back());
        std::vector<double> eb(beta);
        eb.push_back(bj);
        const Eigen::VectorXcd u_ext = tridiag_exp_e1(ea, eb, dt);
        if (std::abs(u_ext(u_ext.size() - 1)) < s.tolerance) {
            converged = true;
            break;
        }

        beta.push_back(bj);
        if (j + 1 < m_max) {
            vspace.emplace_back(dim);
            auto& next = vspace.back();
            for (basis_t b = 0; b < dim; ++b) next[b] = w[b] / bj;
        }
    }
    if (!converged && m == s.subspace_dim) return false;

    const Eigen::VectorXcd u = tridiag_exp_e1(alpha, beta, dt);
    for (basis_t b = 0; b < dim; ++b) {
        cplx acc{0.0, 0.0};
        for (int i = 0; i < m; ++i) acc += u(i) * vspace[static_cast<std::size_t>(i)][b];
        psi[b] = acc;
    }
    return true;
}

} // namespace detail

/// psi(t) = exp(-iHt) psi by Lanczos projection with automatic substepping
/// (substeps halve until the residual estimate meets the tolerance). The
/// input must be normalized; unitarity drift beyond 1e-8 per substep is a
/// numeric failure, smaller drift is renormalized away.
inline StateVector krylov_evolve(const SparseOperator& h, const StateVector& psi, double t,
                                 const KrylovSettings& settings = {}) {
    settings.validate();
    if (t < 0.0) throw config_error("krylov_evolve: negative time");
    if (psi.dim() != h.dimension) throw config_error("krylov_evolve: dimension mismatch");
    if (std::abs(psi.norm() - 1.0) > 1e-6)
        throw config_error("krylov_evolve expects a normalized state");

    StateVector out = psi;
    if (t == 0.0) return out;

    std::vector<std::vector<cplx>> vspace;
    std::vector<cplx> w;

    const double min_step = settings.max_substep / 1048576.0;
    double remaining = t;
    double step = std::min(settings.max_substep, t);
    while (remaining > 1e-15 * t) {
        const double dt = std::min(step, remaining);
        std::vector<cplx> trial = out.amps;
        if (!detail::lanczos_step(h, trial, dt, settings, vspace, w)) {
            step *= 0.5;
            if (step < min_step)
                throw numeric_error("krylov_evolve: no convergence within subspace at minimum substep");
            continue;
        }
        double nn = 0.0;
        for (const cplx& a : trial) nn += std::norm(a);
        nn = std::sqrt(nn);
        if (std::abs(nn - 1.0) > 1e-8)
            throw numeric_error("krylov_evolve: unitarity drift " + std::to_string(nn - 1.0));
        const double inv = 1.0 / nn;
        for (cplx& a : trial) a *= inv;
        out.amps = std::move(trial);
        remaining -= dt;
    }
    return out;
}

} // namespace starkmbl
