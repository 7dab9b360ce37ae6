#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "starkmbl/krylov.hpp"
#include "starkmbl/observables.hpp"
#include "starkmbl/rotations.hpp"
#include "starkmbl/trotter.hpp"

namespace starkmbl {

struct TimeGrid {
    double t_max = 7.0;
    int n_points = 40;

    void validate() const {
        if (!(t_max > 0.0)) throw config_error("time grid t_max must be positive");
        if (n_points < 2) throw config_error("time grid needs at least 2 points");
    }
    std::vector<double> times() const {
        validate();
        std::vector<double> ts(static_cast<std::size_t>(n_points));
        for (int i = 0; i < n_points; ++i)
            ts[static_cast<std::size_t>(i)] = t_max * i / (n_points - 1);
        return ts;
    }
};

enum class EvolutionMode { continuous, trotter };

struct QuenchConfig {
    int n = 0;
    CouplingMatrix couplings;
    FieldSpec field = LinearFieldSpec{};
    SpinPattern pattern;
    TimeGrid grid{7.0, 40};
    double window_lo = 5.0;
    double window_hi = 7.0;
    EvolutionMode mode = EvolutionMode::continuous;
    TrotterSettings trotter{};
    KrylovSettings krylov{};

    void validate() const {
        ChainConfig chain(n);
        if (couplings.n != n) throw config_error("quench: coupling matrix size mismatch");
        pattern.validate_for(n);
        grid.validate();
        if (window_lo > window_hi || window_hi > grid.t_max + 1e-12)
            throw config_error("quench: averaging window must lie inside the time grid");
    }
};

struct QuenchResult {
    SiteSeries sites;
    ImbalanceRecord imbalance;
};

namespace detail {

/// Sample times for a run: the uniform grid in continuous mode, cycle
/// boundaries in Trotter mode.
inline std::vector<double> sample_times(const QuenchConfig& cfg) {
    if (cfg.mode == EvolutionMode::continuous) return cfg.grid.times();
    cfg.trotter.validate();
    const double period = cfg.trotter.dt1 + cfg.trotter.dt2;
    const int cycles = static_cast<int>(std::floor(cfg.grid.t_max / period + 1e-9));
    if (cycles < 1) throw config_error("quench: trotter cycle longer than the time grid");
    std::vector<double> ts(static_cast<std::size_t>(cycles) + 1);
    for (int k = 0; k <= cycles; ++k) ts[static_cast<std::size_t>(k)] = k * period;
    return ts;
}

template <class Advance>
QuenchResult record_quench(const QuenchConfig& cfg, StateVector psi,
                           const std::vector<double>& ts, Advance&& advance) {
    QuenchResult res;
    res.sites.t = ts;
    res.imbalance.series.t = ts;
    res.sites.sz.reserve(ts.size());
    res.imbalance.series.v.reserve(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (k > 0) advance(psi, ts[k - 1], ts[k]);
        std::vector<double> mags = site_magnetizations(psi);
        res.imbalance.series.v.push_back(generalized_imbalance(mags, cfg.pattern));
        res.sites.sz.push_back(std::move(mags));
    }
    res.imbalance.window_lo = cfg.window_lo;
    res.imbalance.window_hi = cfg.window_hi;
    res.imbalance.late_time_mean =
        late_time_average(res.imbalance.series, cfg.window_lo, cfg.window_hi);
    return res;
}

} // namespace detail

/// Quench with an explicit field profile and initial state (noise instances
/// plug in here).
inline QuenchResult run_quench_instance(const QuenchConfig& cfg, const FieldProfile& field,
                                        StateVector psi0) {
    cfg.validate();
    const std::vector<double> ts = detail::sample_times(cfg);
    if (cfg.mode == EvolutionMode::continuous) {
        const SparseOperator h = build_ising(cfg.couplings, field);
        return detail::record_quench(cfg, std::move(psi0), ts,
                                     [&](StateVector& psi, double t0, double t1) {
                                         psi = krylov_evolve(h, psi, t1 - t0, cfg.krylov);
                                     });
    }
    const double bz0 = bias_of(cfg.field);
    const TrotterCycle cycle(TrotterCycle::couplings_for_target(cfg.couplings, cfg.trotter),
                             TrotterCycle::local_field_for_target(field, bz0, cfg.trotter), bz0,
                             cfg.trotter, cfg.krylov);
    return detail::record_quench(cfg, std::move(psi0), ts,
                                 [&](StateVector& psi, double, double) { cycle.advance(psi); });
}

/// Quench from the configured product state under the configured field.
inline QuenchResult run_quench(const QuenchConfig& cfg) {
    cfg.validate();
    return run_quench_instance(cfg, materialize(cfg.field, cfg.n), product_state(cfg.pattern));
}

struct DeerConfig {
    int n = 0;
    CouplingMatrix couplings;
    FieldSpec field = LinearFieldSpec{};
    int probe_site = 1;
    int region_offset = 1; // R: region starts at probe + R
    int region_size = 3;
    Axis pulse_axis = Axis::x;
    TimeGrid grid{4.0, 21};
    double window_lo = 2.0;
    double window_hi = 4.0;
    KrylovSettings krylov{};

    std::vector<int> region_sites() const {
        std::vector<int> sites(static_cast<std::size_t>(region_size));
        for (int i = 0; i < region_size; ++i) sites[static_cast<std::size_t>(i)] = probe_site + region_offset + i;
        return sites;
    }

    void validate() const {
        ChainConfig chain(n);
        if (couplings.n != n) throw config_error("deer: coupling matrix size mismatch");
        grid.validate();
        if (probe_site < 1 || probe_site > n) throw config_error("deer: probe site out of range");
        if (region_offset < 1) throw config_error("deer: region offset must be >= 1");
        if (region_size < 1) throw config_error("deer: region size must be >= 1");
        for (int s : region_sites()) {
            if (s < 1 || s > n) throw config_error("deer: region extends outside the chain");
            if (s == probe_site) throw config_error("deer: probe overlaps the pulsed region");
        }
        if (window_lo > window_hi || window_hi > grid.t_max + 1e-12)
            throw config_error("deer: averaging window must lie inside the time grid");
    }
};

struct DeerResult {
    TimeSeries echo;
    TimeSeries deer;
    TimeSeries difference;
    double windowed_difference = 0.0;
};

/// Spin-echo vs DEER comparison from a shared initial state and Hamiltonian.
/// Echo arm: evolve t/2, pi pulse on the probe, evolve t/2, frame-restoring
/// pi pulse, measure <sigma^z_probe>. DEER arm adds pi/2 pulses on the region
/// at t/2 (echo pulse first). Both arms share the first-half trajectory.
inline DeerResult run_deer_instance(const DeerConfig& cfg, const FieldProfile& field,
                                    const StateVector& psi0) {
    cfg.validate();
    const SparseOperator h = build_ising(cfg.couplings, field);
    const std::vector<double> ts = cfg.grid.times();
    const std::vector<int> region = cfg.region_sites();

    DeerResult res;
    res.echo.t = res.deer.t = res.difference.t = ts;

    StateVector half = psi0; // state at t/2 for the current grid time
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (k > 0) half = krylov_evolve(h, half, 0.5 * (ts[k] - ts[k - 1]), cfg.krylov);

        StateVector echo_arm = rotate_site(half, cfg.probe_site, cfg.pulse_axis, M_PI);
        StateVector deer_arm = echo_arm;
        for (int s : region) rotate_site_inplace(deer_arm, s, cfg.pulse_axis, 0.5 * M_PI);

        const double t_half = 0.5 * ts[k];
        for (StateVector* arm : {&echo_arm, &deer_arm}) {
            *arm = krylov_evolve(h, *arm, t_half, cfg.krylov);
            rotate_site_inplace(*arm, cfg.probe_site, cfg.pulse_axis, M_PI);
        }
        res.echo.v.push_back(site_magnetizations(echo_arm)[static_cast<std::size_t>(cfg.probe_site - 1)]);
        res.deer.v.push_back(site_magnetizations(deer_arm)[static_cast<std::size_t>(cfg.probe_site - 1)]);
        res.difference.v.push_back(res.deer.v.back() - res.echo.v.back());
    }
    res.windowed_difference = late_time_average(res.difference, cfg.window_lo, cfg.window_hi);
    return res;
}

/// DEER from the Néel state (the protocol's fixed initial state).
inline DeerResult run_deer(const DeerConfig& cfg) {
    cfg.validate();
    return run_deer_instance(cfg, materialize(cfg.field, cfg.n),
                             product_state(SpinPattern::neel(cfg.n)));
}

struct QuadraticConfig {
    int n = 0;
    CouplingMatrix couplings;
    QuadraticFieldSpec field{};
    SpinPattern pattern; // Neel if empty
    TimeGrid grid{7.0, 40};
    KrylovSettings krylov{};
    int classify_points = 5; // trailing grid points for the error-bar test

    void validate() const {
        ChainConfig chain(n);
        if (couplings.n != n) throw config_error("quadratic run: coupling matrix size mismatch");
        grid.validate();
        if (classify_points < 2 || classify_points > grid.n_points)
            throw config_error("quadratic run: bad classify_points");
    }
};

struct SiteClassification {
    int center_site = 0;
    std::vector<bool> localized;       // per site: separated from the center spin
    std::optional<int> inner_pair_lo;  // innermost localized pair, if any
    std::optional<int> inner_pair_hi;
    double boundary_slope = 0.0; // |local field slope| at the innermost pair
};

struct QuadraticResult {
    SiteSeries sites;
    SiteClassification classification;
};

/// Quench under the quadratic field, then split sites into localized edges
/// and a thermal core: a site counts as localized when its late-time
/// magnetization is separated from the center spin's by more than their
/// mutual error bars (mean +- std over the trailing grid points).
inline QuadraticResult run_quadratic(const QuadraticConfig& cfg) {
    cfg.validate();
    QuenchConfig qc;
    qc.n = cfg.n;
    qc.couplings = cfg.couplings;
    qc.field = cfg.field;
    qc.pattern = cfg.pattern.size() ? cfg.pattern : SpinPattern::neel(cfg.n);
    qc.grid = cfg.grid;
    qc.window_lo = 0.0;
    qc.window_hi = cfg.grid.t_max;
    qc.krylov = cfg.krylov;

    QuadraticResult res;
    res.sites = run_quench(qc).sites;

    const std::size_t npts = res.sites.t.size();
    const std::size_t tail = static_cast<std::size_t>(cfg.classify_points);
    std::vector<double> mu(static_cast<std::size_t>(cfg.n)), sd(static_cast<std::size_t>(cfg.n));
    for (int j = 0; j < cfg.n; ++j) {
        double s = 0.0;
        for (std::size_t k = npts - tail; k < npts; ++k) s += res.sites.sz[k][static_cast<std::size_t>(j)];
        const double m = s / static_cast<double>(tail);
        double var = 0.0;
        for (std::size_t k = npts - tail; k < npts; ++k) {
            const double d = res.sites.sz[k][static_cast<std::size_t>(j)] - m;
            var += d * d;
        }
        mu[static_cast<std::size_t>(j)] = m;
        sd[static_cast<std::size_t>(j)] = std::sqrt(var / static_cast<double>(tail - 1));
    }

    SiteClassification& cls = res.classification;
    cls.center_site = static_cast<int>(std::lround(0.5 * (cfg.n + 1) + cfg.field.center_offset));
    const std::size_t c = static_cast<std::size_t>(cls.center_site - 1);
    cls.localized.resize(static_cast<std::size_t>(cfg.n));
    for (int j = 0; j < cfg.n; ++j)
        cls.localized[static_cast<std::size_t>(j)] =
            std::abs(mu[static_cast<std::size_t>(j)] - mu[c]) >
            sd[static_cast<std::size_t>(j)] + sd[c];
    cls.localized[c] = false;

    const FieldProfile profile = materialize(FieldSpec(cfg.field), cfg.n);
    for (int k = 1;; ++k) {
        const int lo = cls.center_site - k;
        const int hi = cls.center_site + k;
        if (lo < 1 || hi > cfg.n) break;
        if (cls.localized[static_cast<std::size_t>(lo - 1)] &&
            cls.localized[static_cast<std::size_t>(hi - 1)]) {
            cls.inner_pair_lo = lo;
            cls.inner_pair_hi = hi;
            cls.boundary_slope =
                0.5 * (std::abs(local_slope(profile, lo)) + std::abs(local_slope(profile, hi)));
            break;
        }
    }
    return res;
}

struct StabilityConfig {
    int n = 0;
    CouplingMatrix couplings;
    FieldSpec field = LinearFieldSpec{4.5, 2.0};
    std::vector<SpinPattern> patterns;
    TimeGrid grid{100.0, 400};
    double moving_window = 5.0;
    KrylovSettings krylov{};

    void validate() const {
        ChainConfig chain(n);
        if (n > 16) throw resource_error("stability runs are limited to n <= 16");
        if (patterns.empty()) throw config_error("stability: no initial patterns");
        grid.validate();
    }
};

struct StabilityRecord {
    SpinPattern pattern;
    ImbalanceRecord imbalance;
    TimeSeries smoothed;
};

/// Long-time imbalance for several initial patterns, with a moving average
/// applied for reporting.
inline std::vector<StabilityRecord> run_stability(const StabilityConfig& cfg) {
    cfg.validate();
    std::vector<StabilityRecord> out;
    out.reserve(cfg.patterns.size());
    for (const SpinPattern& pattern : cfg.patterns) {
        QuenchConfig qc;
        qc.n = cfg.n;
        qc.couplings = cfg.couplings;
        qc.field = cfg.field;
        qc.pattern = pattern;
        qc.grid = cfg.grid;
        qc.window_lo = std::max(0.0, cfg.grid.t_max - 2.0 * cfg.moving_window);
        qc.window_hi = cfg.grid.t_max;
        qc.krylov = cfg.krylov;
        QuenchResult qr = run_quench(qc);
        StabilityRecord rec;
        rec.pattern = pattern;
        rec.smoothed = moving_average(qr.imbalance.series, cfg.moving_window);
        rec.imbalance = std::move(qr.imbalance);
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace starkmbl
