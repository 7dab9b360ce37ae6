#pragma once

#include <cmath>
#include <type_traits>
#include <variant>
#include <vector>

#include "starkmbl/errors.hpp"

namespace starkmbl {

/// Per-site longitudinal field B^z_j in units of J0 (coefficient of sigma^z_j).
struct FieldProfile {
    std::vector<double> bz;

    FieldProfile() = default;
    explicit FieldProfile(std::vector<double> values) : bz(std::move(values)) {}

    int n() const { return static_cast<int>(bz.size()); }
    double at(int site) const { return bz[static_cast<std::size_t>(site - 1)]; }
};

/// bz[j] = bz0 + (j-1) g, j = 1..n.
inline FieldProfile linear_field(int n, double bz0, double g) {
    std::vector<double> bz(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) bz[static_cast<std::size_t>(j - 1)] = bz0 + (j - 1) * g;
    return FieldProfile(std::move(bz));
}

/// bz[j] = bz0 + gamma (j - (n+1)/2 - center_offset)^2 / (n-1). The continuous
/// slope reaches +-gamma at the chain ends when center_offset = 0.
inline FieldProfile quadratic_field(int n, double bz0, double gamma, double center_offset = 0.0) {
    if (n < 2) throw config_error("quadratic field needs n >= 2");
    std::vector<double> bz(static_cast<std::size_t>(n));
    const double c = 0.5 * (n + 1) + center_offset;
    for (int j = 1; j <= n; ++j) {
        const double d = j - c;
        bz[static_cast<std::size_t>(j - 1)] = bz0 + gamma * d * d / (n - 1);
    }
    return FieldProfile(std::move(bz));
}

/// Bias used in the gradient scans where the couplings segment is stretched:
/// bz0/J0 = 4.4 (1 + 3 g / 5).
inline double experimental_bias_scaling(double g) { return 4.4 * (1.0 + 0.6 * g); }

/// Local field slope at a site: central difference in the interior (exact for
/// a quadratic profile), one-sided at the ends.
inline double local_slope(const FieldProfile& f, int site) {
    const int n = f.n();
    if (site < 1 || site > n) throw config_error("local_slope: site out of range");
    if (n < 2) throw config_error("local_slope needs n >= 2");
    if (site == 1) return f.at(2) - f.at(1);
    if (site == n) return f.at(n) - f.at(n - 1);
    return 0.5 * (f.at(site + 1) - f.at(site - 1));
}

struct LinearFieldSpec {
    double bz0 = 0.0;
    double g = 0.0;
};

struct QuadraticFieldSpec {
    double bz0 = 0.0;
    double gamma = 0.0;
    double center_offset = 0.0;
};

/// Parametric field (noise-perturbable) or an explicit per-site profile.
using FieldSpec = std::variant<LinearFieldSpec, QuadraticFieldSpec, FieldProfile>;

inline FieldProfile materialize(const FieldSpec& spec, int n) {
    return std::visit(
        [n](const auto& s) -> FieldProfile {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LinearFieldSpec>) {
                return linear_field(n, s.bz0, s.g);
            } else if constexpr (std::is_same_v<T, QuadraticFieldSpec>) {
                return quadratic_field(n, s.bz0, s.gamma, s.center_offset);
            } else {
                if (s.n() != n) throw config_error("explicit field profile length mismatch");
                return s;
            }
        },
        spec);
}

/// Bias (site-independent part) of a parametric field spec.
inline double bias_of(const FieldSpec& spec) {
    if (const auto* lin = std::get_if<LinearFieldSpec>(&spec)) return lin->bz0;
    if (const auto* quad = std::get_if<QuadraticFieldSpec>(&spec)) return quad->bz0;
    throw config_error("explicit field profiles carry no declared bias");
}

} // namespace starkmbl
