#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "starkmbl/chain.hpp"
#include "starkmbl/fields.hpp"
#include "starkmbl/observables.hpp"
#include "starkmbl/rotations.hpp"

namespace starkmbl {

/// Gaussian stream over mt19937_64 with an explicit Box-Muller transform, so
/// draws are identical across standard-library implementations.
class GaussianRng {
  public:
    explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 finalizer; decorrelates per-instance streams from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Shot-to-shot experimental noise: initial-state rotation plus Gaussian
/// variation of the bias, the gradient slope, and the per-site local fields.
struct NoiseModel {
    double init_rotation_angle = 0.075 * M_PI; // Z-X plane, about y
    double sigma_bz0 = 2.4;                    // J0 units (0.6 kHz at J0 = 0.25 kHz)
    double sigma_g_frac = 0.0625;
    double sigma_local_frac = 0.03125;
    int n_samples = 50;
    std::uint64_t seed = 0;

    void validate() const {
        if (sigma_bz0 < 0.0 || sigma_g_frac < 0.0 || sigma_local_frac < 0.0)
            throw config_error("noise sigmas must be nonnegative");
        if (n_samples < 1) throw config_error("noise n_samples must be >= 1");
    }
};

struct NoiseInstance {
    FieldProfile field;
    StateVector psi0;
};

/// One perturbed realization. Draw order is pinned: bias, slope, then one
/// local factor per site (always n+2 gaussians, so streams stay aligned).
inline NoiseInstance sample_instance(const NoiseModel& model, const FieldSpec& base, int n,
                                     const SpinPattern& pattern, GaussianRng& rng) {
    model.validate();
    pattern.validate_for(n);
    if (std::holds_alternative<FieldProfile>(base))
        throw config_error("noise sampling requires a parametric (linear/quadratic) field");

    const double xi_bias = rng.gaussian();
    const double xi_slope = rng.gaussian();
    std::vector<double> xi_site(static_cast<std::size_t>(n));
    for (double& x : xi_site) x = rng.gaussian();

    const double bias = bias_of(base) + model.sigma_bz0 * xi_bias;
    const double slope_scale = 1.0 + model.sigma_g_frac * xi_slope;

    FieldSpec perturbed = base;
    if (auto* lin = std::get_if<LinearFieldSpec>(&perturbed)) {
        lin->g *= slope_scale;
        lin->bz0 = 0.0; // bias handled below, local part scaled per site
    } else {
        auto& quad = std::get<QuadraticFieldSpec>(perturbed);
        quad.gamma *= slope_scale;
        quad.bz0 = 0.0;
    }
    FieldProfile local = materialize(perturbed, n);
    std::vector<double> bz(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j)
        bz[static_cast<std::size_t>(j - 1)] =
            bias + local.at(j) * (1.0 + model.sigma_local_frac * xi_site[static_cast<std::size_t>(j - 1)]);

    NoiseInstance inst;
    inst.field = FieldProfile(std::move(bz));
    inst.psi0 = product_state(pattern);
    if (model.init_rotation_angle != 0.0)
        rotate_global_inplace(inst.psi0, Axis::y, model.init_rotation_angle);
    return inst;
}

namespace detail {

inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

} // namespace detail

/// One instance's sampled observables: a scalar channel and an optional
/// per-site channel on the same time grid.
struct InstanceSeries {
    TimeSeries scalar;
    std::vector<std::vector<double>> sites; // [time][site], may be empty
};

struct NoiseAverageResult {
    std::vector<double> t;
    std::vector<double> mean;
    std::vector<double> std_error;
    std::vector<std::vector<double>> site_mean;        // [time][site] if provided
    std::vector<std::vector<double>> instance_values;  // [instance][time] if archived
};

struct NoiseAverageOptions {
    bool keep_instances = false;
    int workers = 1;
};

/// Pointwise mean and standard error over n_samples independent instances.
/// Run order does not affect the result: instances are reduced pairwise in
/// index order.
template <class Runner>
NoiseAverageResult noise_average(const NoiseModel& model, Runner&& run,
                                 const NoiseAverageOptions& opt = {}) {
    model.validate();
    const int k = model.n_samples;
    std::vector<InstanceSeries> results(static_cast<std::size_t>(k));

    const int workers = std::max(1, opt.workers);
    if (workers == 1) {
        for (int i = 0; i < k; ++i) {
            GaussianRng rng(mix_seed(model.seed, static_cast<std::uint64_t>(i)));
            results[static_cast<std::size_t>(i)] = run(i, rng);
        }
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= k) return;
                GaussianRng rng(mix_seed(model.seed, static_cast<std::uint64_t>(i)));
                results[static_cast<std::size_t>(i)] = run(i, rng);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min(workers, k); ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    const std::size_t npts = results.front().scalar.t.size();
    for (const auto& r : results) {
        r.scalar.validate();
        if (r.scalar.t != results.front().scalar.t)
            throw numeric_error("noise_average: instances sampled on different time grids");
    }

    NoiseAverageResult out;
    out.t = results.front().scalar.t;
    out.mean.resize(npts);
    out.std_error.resize(npts);
    std::vector<double> column(static_cast<std::size_t>(k));
    for (std::size_t p = 0; p < npts; ++p) {
        for (int i = 0; i < k; ++i) column[static_cast<std::size_t>(i)] = results[static_cast<std::size_t>(i)].scalar.v[p];
        const double m = detail::pairwise_sum(column) / k;
        out.mean[p] = m;
        if (k > 1) {
            std::vector<double> sq(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i) {
                const double d = column[static_cast<std::size_t>(i)] - m;
                sq[static_cast<std::size_t>(i)] = d * d;
            }
            out.std_error[p] = std::sqrt(detail::pairwise_sum(sq) / (k - 1) / k);
        }
    }

    if (!results.front().sites.empty()) {
        const std::size_t nsites = results.front().sites.front().size();
        out.site_mean.assign(npts, std::vector<double>(nsites, 0.0));
        for (std::size_t p = 0; p < npts; ++p)
            for (std::size_t j = 0; j < nsites; ++j) {
                for (int i = 0; i < k; ++i)
                    column[static_cast<std::size_t>(i)] = results[static_cast<std::size_t>(i)].sites[p][j];
                out.site_mean[p][j] = detail::pairwise_sum(column) / k;
            }
    }
    if (opt.keep_instances) {
        out.instance_values.reserve(static_cast<std::size_t>(k));
        for (const auto& r : results) out.instance_values.push_back(r.scalar.v);
    }
    return out;
}

} // namespace starkmbl
