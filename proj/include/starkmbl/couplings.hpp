#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "starkmbl/errors.hpp"

namespace starkmbl {

/// Symmetric spin-spin coupling matrix J_{jj'} in units of J0, zero diagonal.
struct CouplingMatrix {
    int n = 0;
    std::vector<double> v; // row-major n*n

    CouplingMatrix() = default;
    explicit CouplingMatrix(int sites)
        : n(sites), v(static_cast<std::size_t>(sites) * sites, 0.0) {}

    double& at(int a, int b) { return v[static_cast<std::size_t>(a - 1) * n + (b - 1)]; }
    double at(int a, int b) const { return v[static_cast<std::size_t>(a - 1) * n + (b - 1)]; }
};

/// J_{ab} = 1/|a-b|^alpha (units of J0).
inline CouplingMatrix power_law_couplings(int n, double alpha) {
    if (!(alpha > 0.0)) throw config_error("power-law exponent must be positive");
    CouplingMatrix c(n);
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b) {
            const double j = std::pow(static_cast<double>(b - a), -alpha);
            c.at(a, b) = j;
            c.at(b, a) = j;
        }
    return c;
}

/// Plain-text coupling file: first non-comment line is n, followed by n rows
/// of n reals (units of J0). '#' starts a comment. Asymmetry beyond 1e-9 or a
/// nonzero diagonal is rejected; small asymmetry is averaged away.
inline CouplingMatrix load_couplings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open coupling file " + path.string());

    std::vector<double> numbers;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            char* end = nullptr;
            const double x = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0')
                throw config_error("coupling file " + path.string() +
                                   ": cannot parse token \"" + tok + "\"");
            numbers.push_back(x);
        }
    }
    if (numbers.empty()) throw config_error("coupling file " + path.string() + " is empty");
    const double n_real = numbers.front();
    const int n = static_cast<int>(n_real);
    if (n < 2 || n != n_real)
        throw config_error("coupling file " + path.string() + ": bad size header");
    if (numbers.size() != 1 + static_cast<std::size_t>(n) * n)
        throw config_error("coupling file " + path.string() + ": expected " +
                           std::to_string(static_cast<std::size_t>(n) * n) + " entries, found " +
                           std::to_string(numbers.size() - 1));

    CouplingMatrix c(n);
    for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b)
            c.at(a, b) = numbers[1 + static_cast<std::size_t>(a - 1) * n + (b - 1)];

    for (int a = 1; a <= n; ++a) {
        if (c.at(a, a) != 0.0)
            throw config_error("coupling file " + path.string() + ": nonzero diagonal at site " +
                               std::to_string(a));
        for (int b = a + 1; b <= n; ++b) {
            if (std::abs(c.at(a, b) - c.at(b, a)) > 1e-9)
                throw config_error("coupling file " + path.string() + ": asymmetric at (" +
                                   std::to_string(a) + "," + std::to_string(b) + ")");
            const double sym = 0.5 * (c.at(a, b) + c.at(b, a));
            c.at(a, b) = sym;
            c.at(b, a) = sym;
        }
    }
    return c;
}

/// Best-fit power-law exponent: least squares of log J against log distance
/// over all positive off-diagonal entries.
inline double fit_power_law_exponent(const CouplingMatrix& c) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (int a = 1; a <= c.n; ++a)
        for (int b = a + 1; b <= c.n; ++b) {
            if (c.at(a, b) <= 0.0) continue;
            const double x = std::log(static_cast<double>(b - a));
            const double y = std::log(c.at(a, b));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
    const double denom = m * sxx - sx * sx;
    if (m < 2 || denom == 0.0)
        throw config_error("coupling matrix has too few positive entries for a power-law fit");
    const double slope = (m * sxy - sx * sy) / denom;
    return -slope;
}

} // namespace starkmbl
