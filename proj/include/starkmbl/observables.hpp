#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "starkmbl/chain.hpp"

namespace starkmbl {

/// Scalar observable samples over dimensionless time tJ0.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> v;

    void validate() const {
        if (t.size() != v.size()) throw config_error("time series length mismatch");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (!(t[i] > t[i - 1])) throw config_error("time series must be strictly ascending");
    }
};

/// Per-site observable samples: sz[k][j-1] is <sigma^z_j> at time t[k].
struct SiteSeries {
    std::vector<double> t;
    std::vector<std::vector<double>> sz;
};

/// <sigma^z_j> for every site.
inline std::vector<double> site_magnetizations(const StateVector& psi) {
    std::vector<double> mags(static_cast<std::size_t>(psi.n), 0.0);
    for (basis_t b = 0; b < psi.dim(); ++b) {
        const double p = std::norm(psi.amps[b]);
        if (p == 0.0) continue;
        for (int j = 1; j <= psi.n; ++j) mags[static_cast<std::size_t>(j - 1)] += p * sz_of(b, j);
    }
    return mags;
}

/// Mean magnetization of the initially-up group minus the initially-down
/// group. 2 = frozen pattern, 0 = uniform relaxation.
inline double generalized_imbalance(std::span<const double> mags, const SpinPattern& pattern0) {
    if (static_cast<int>(mags.size()) != pattern0.size())
        throw config_error("generalized_imbalance: magnetization/pattern length mismatch");
    if (pattern0.fully_polarized())
        throw config_error("generalized imbalance is undefined for a fully polarized pattern");
    double up_sum = 0.0, dn_sum = 0.0;
    int ups = 0, dns = 0;
    for (int j = 1; j <= pattern0.size(); ++j) {
        if (pattern0.up(j)) {
            up_sum += mags[static_cast<std::size_t>(j - 1)];
            ++ups;
        } else {
            dn_sum += mags[static_cast<std::size_t>(j - 1)];
            ++dns;
        }
    }
    return up_sum / ups - dn_sum / dns;
}

/// Arithmetic mean of the samples inside [t_lo, t_hi].
inline double late_time_average(const TimeSeries& ts, double t_lo, double t_hi) {
    ts.validate();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ts.t.size(); ++i)
        if (ts.t[i] >= t_lo && ts.t[i] <= t_hi) {
            sum += ts.v[i];
            ++count;
        }
    if (count == 0) throw config_error("late_time_average: empty window");
    return sum / static_cast<double>(count);
}

struct ImbalanceRecord {
    TimeSeries series;
    double late_time_mean = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

/// <sigma^z_j sigma^z_j'>; equals 1 exactly for j = j'.
inline double zz_correlator(const StateVector& psi, int j, int jp) {
    if (j < 1 || j > psi.n || jp < 1 || jp > psi.n)
        throw config_error("zz_correlator: invalid site");
    if (j == jp) return 1.0;
    double acc = 0.0;
    for (basis_t b = 0; b < psi.dim(); ++b) {
        const double p = std::norm(psi.amps[b]);
        if (p != 0.0) acc += p * sz_of(b, j) * sz_of(b, jp);
    }
    return acc;
}

/// Quantum Fisher information of the staggered magnetization witness
/// W = sum_j (-1)^j sigma^z_j (j 1-based): f_Q = (<W^2> - <W>^2)/n >= 0.
inline double qfi_staggered(const StateVector& psi) {
    double w1 = 0.0, w2 = 0.0;
    for (basis_t b = 0; b < psi.dim(); ++b) {
        const double p = std::norm(psi.amps[b]);
        if (p == 0.0) continue;
        int w = 0;
        for (int j = 1; j <= psi.n; ++j) w += (j % 2 ? -1 : 1) * sz_of(b, j);
        w1 += p * w;
        w2 += p * static_cast<double>(w) * w;
    }
    return (w2 - w1 * w1) / psi.n;
}

/// Von Neumann entropy (base 2) of the reduced state of sites 1..cut.
inline double bipartite_entropy(const StateVector& psi, int cut) {
    if (cut < 1 || cut >= psi.n) throw config_error("bipartite_entropy: invalid cut");
    const basis_t dim_l = basis_t{1} << cut;
    const basis_t dim_r = basis_t{1} << (psi.n - cut);
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(dim_l), static_cast<Eigen::Index>(dim_r));
    for (basis_t right = 0; right < dim_r; ++right)
        for (basis_t left = 0; left < dim_l; ++left)
            a(static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(right)) =
                psi.amps[left | (right << cut)];
    const Eigen::VectorXd sv = a.jacobiSvd().singularValues();
    double s = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        const double p = sv(i) * sv(i);
        if (p > 1e-14) s -= p * std::log2(p);
    }
    return s;
}

/// Centered moving average over [t - w/2, t + w/2], truncated at the ends.
inline TimeSeries moving_average(const TimeSeries& ts, double window) {
    ts.validate();
    if (!(window > 0.0)) throw config_error("moving_average: window must be positive");
    TimeSeries out;
    out.t = ts.t;
    out.v.resize(ts.v.size());
    const double half = 0.5 * window;
    for (std::size_t i = 0; i < ts.t.size(); ++i) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < ts.t.size(); ++k)
            if (ts.t[k] >= ts.t[i] - half && ts.t[k] <= ts.t[i] + half) {
                sum += ts.v[k];
                ++count;
            }
        out.v[i] = sum / static_cast<double>(count);
    }
    return out;
}

struct ExpDecayFit {
    double amplitude = 0.0;
    double tau = 0.0; // 1/J0 units; +inf for a non-decaying series
    double tau_stderr = 0.0;
};

/// Log-linear least squares of A exp(-t/tau) over samples with t >= t_start.
inline ExpDecayFit fit_exponential_decay(const TimeSeries& ts, double t_start) {
    ts.validate();
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < ts.t.size(); ++i) {
        if (ts.t[i] < t_start) continue;
        if (!(ts.v[i] > 0.0))
            throw config_error("fit_exponential_decay: nonpositive sample in fit range");
        xs.push_back(ts.t[i]);
        ys.push_back(std::log(ts.v[i]));
    }
    const std::size_t m = xs.size();
    if (m < 4) throw config_error("fit_exponential_decay needs at least 4 points after t_start");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / m;

    ExpDecayFit fit;
    fit.amplitude = std::exp(intercept);
    if (slope >= 0.0) {
        fit.tau = std::numeric_limits<double>::infinity();
        fit.tau_stderr = std::numeric_limits<double>::infinity();
        return fit;
    }
    fit.tau = -1.0 / slope;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ss_res += r * r;
    }
    const double slope_var = m > 2 ? ss_res / static_cast<double>(m - 2) * m / denom : 0.0;
    fit.tau_stderr = std::sqrt(slope_var) / (slope * slope);
    return fit;
}

} // namespace starkmbl
