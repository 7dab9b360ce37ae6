#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "starkmbl/observables.hpp"

using namespace starkmbl;

namespace {

StateVector ghz(int n, bool staggered) {
    StateVector psi = StateVector::zero(n);
    const basis_t a = staggered ? SpinPattern::neel(n).index() : 0;
    const basis_t mask = (basis_t{1} << n) - 1;
    psi.amps[a] = 1.0 / std::sqrt(2.0);
    psi.amps[~a & mask] = 1.0 / std::sqrt(2.0);
    return psi;
}

} // namespace

TEST_CASE("site magnetizations of simple states") {
    const std::vector<double> neel = site_magnetizations(product_state(SpinPattern::neel(6)));
    for (int j = 1; j <= 6; ++j) CHECK(neel[static_cast<std::size_t>(j - 1)] == (j % 2 ? -1.0 : 1.0));

    StateVector plus = StateVector::zero(2); // site 2 in (|0>+|1>)/sqrt(2)
    plus.amps[0] = plus.amps[2] = 1.0 / std::sqrt(2.0);
    const std::vector<double> mags = site_magnetizations(plus);
    CHECK(mags[1] == Catch::Approx(0.0).margin(1e-15));

    for (double m : site_magnetizations(ghz(2, false)))
        CHECK(m == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("generalized imbalance") {
    const SpinPattern neel = SpinPattern::neel(8);
    const std::vector<double> perfect = site_magnetizations(product_state(neel));
    CHECK(generalized_imbalance(perfect, neel) == Catch::Approx(2.0));

    const std::vector<double> uniform(8, 0.31);
    CHECK(generalized_imbalance(uniform, neel) == Catch::Approx(0.0).margin(1e-15));

    // one flipped spin among ten: uniform relaxation vs partial memory
    SpinPattern one_up("1000000000");
    CHECK(generalized_imbalance(std::vector<double>(10, -1.0), one_up) == Catch::Approx(0.0));
    std::vector<double> partial(10, -0.8);
    partial[0] = 0.8;
    CHECK(generalized_imbalance(partial, one_up) == Catch::Approx(1.6));

    CHECK_THROWS_AS(generalized_imbalance(uniform, SpinPattern("11111111")), config_error);
    CHECK_THROWS_AS(generalized_imbalance(uniform, SpinPattern("0101")), config_error);
}

TEST_CASE("imbalance is bounded by 2 and matches the staggered form for Neel") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 4 + static_cast<int>(gen() % 7);
        std::vector<double> mags(static_cast<std::size_t>(n));
        for (double& m : mags) m = u(gen);
        SpinPattern p;
        do {
            std::string bits;
            for (int j = 0; j < n; ++j) bits.push_back(gen() % 2 ? '1' : '0');
            p = SpinPattern(bits);
        } while (p.fully_polarized());
        CHECK(std::abs(generalized_imbalance(mags, p)) <= 2.0 + 1e-12);

        if (n % 2 == 0) {
            const SpinPattern neel = SpinPattern::neel(n);
            double staggered = 0.0;
            for (int j = 1; j <= n; ++j)
                staggered += (neel.up(j) ? 1.0 : -1.0) * mags[static_cast<std::size_t>(j - 1)];
            CHECK(generalized_imbalance(mags, neel) ==
                  Catch::Approx(2.0 * staggered / n).margin(1e-12));
        }
    }
}

TEST_CASE("late time average") {
    TimeSeries constant{{0.0, 1.0, 2.0, 3.0}, {0.7, 0.7, 0.7, 0.7}};
    CHECK(late_time_average(constant, 0.5, 3.0) == Catch::Approx(0.7));

    TimeSeries ramp;
    for (int i = 0; i <= 14; ++i) {
        ramp.t.push_back(0.5 * i);
        ramp.v.push_back(0.5 * i);
    }
    CHECK(late_time_average(ramp, 5.0, 7.0) == Catch::Approx(6.0));
    CHECK_THROWS_AS(late_time_average(ramp, 8.0, 9.0), config_error);
}

TEST_CASE("staggered QFI") {
    CHECK(qfi_staggered(product_state(SpinPattern::neel(7))) == Catch::Approx(0.0).margin(1e-14));
    CHECK(qfi_staggered(product_state(SpinPattern("0011"))) == Catch::Approx(0.0).margin(1e-14));
    const int n = 6;
    CHECK(qfi_staggered(ghz(n, true)) == Catch::Approx(static_cast<double>(n)).margin(1e-12));

    for (unsigned s = 0; s < 5; ++s) {
        const StateVector psi = oracles::random_state(5, 40 + s);
        const double f = qfi_staggered(psi);
        CHECK(f >= -1e-12);

        // relabeling up<->down flips the witness sign, which squares away
        StateVector flipped = psi;
        const basis_t mask = (basis_t{1} << 5) - 1;
        for (basis_t b = 0; b < psi.dim(); ++b) flipped.amps[~b & mask] = psi.amps[b];
        CHECK(qfi_staggered(flipped) == Catch::Approx(f).margin(1e-12));
    }
}

TEST_CASE("zz correlators") {
    const StateVector neel = product_state(SpinPattern::neel(6));
    CHECK(zz_correlator(neel, 1, 2) == Catch::Approx(-1.0));
    CHECK(zz_correlator(neel, 3, 3) == 1.0);
    CHECK(zz_correlator(ghz(2, false), 1, 2) == Catch::Approx(1.0));
    CHECK_THROWS_AS(zz_correlator(neel, 0, 2), config_error);
    CHECK_THROWS_AS(zz_correlator(neel, 1, 7), config_error);
}

TEST_CASE("bipartite entropy") {
    const StateVector prod = product_state(SpinPattern("010011"));
    for (int cut = 1; cut < 6; ++cut)
        CHECK(bipartite_entropy(prod, cut) == Catch::Approx(0.0).margin(1e-12));

    const StateVector g = ghz(6, false);
    for (int cut = 1; cut < 6; ++cut)
        CHECK(bipartite_entropy(g, cut) == Catch::Approx(1.0).margin(1e-12));

    // Page-like value for a Haar state: log2(dimA) - 1/(2 ln 2) at equal cuts
    const StateVector haar = oracles::random_state(10, 99);
    CHECK(bipartite_entropy(haar, 5) == Catch::Approx(5.0 - 1.0 / (2.0 * std::log(2.0))).margin(0.2));

    // symmetry of the two reductions
    for (unsigned s = 0; s < 3; ++s) {
        const StateVector psi = oracles::random_state(8, 7 + s);
        for (int cut : {1, 3, 5, 7}) {
            StateVector reversed = StateVector::zero(8);
            for (basis_t b = 0; b < psi.dim(); ++b) {
                basis_t rb = 0; // reverse the chain so the complementary cut lines up
                for (int j = 0; j < 8; ++j)
                    if (b & (basis_t{1} << j)) rb |= basis_t{1} << (7 - j);
                reversed.amps[rb] = psi.amps[b];
            }
            CHECK(bipartite_entropy(psi, cut) ==
                  Catch::Approx(bipartite_entropy(reversed, 8 - cut)).margin(1e-10));
        }
    }
    CHECK_THROWS_AS(bipartite_entropy(prod, 0), config_error);
    CHECK_THROWS_AS(bipartite_entropy(prod, 6), config_error);
}

TEST_CASE("moving average") {
    TimeSeries constant{{0, 1, 2, 3, 4}, {2.5, 2.5, 2.5, 2.5, 2.5}};
    for (double v : moving_average(constant, 2.0).v) CHECK(v == Catch::Approx(2.5));

    TimeSeries linear;
    for (int i = 0; i <= 20; ++i) {
        linear.t.push_back(0.5 * i);
        linear.v.push_back(1.5 * 0.5 * i);
    }
    const TimeSeries smooth = moving_average(linear, 2.0);
    for (std::size_t i = 4; i + 4 < smooth.t.size(); ++i)
        CHECK(smooth.v[i] == Catch::Approx(linear.v[i]).margin(1e-12));

    TimeSeries alternating;
    for (int i = 0; i < 100; ++i) {
        alternating.t.push_back(0.1 * i);
        alternating.v.push_back(i % 2 ? 1.0 : -1.0);
    }
    const TimeSeries flat = moving_average(alternating, 5.0);
    CHECK(std::abs(flat.v[50]) < 0.05);

    CHECK_THROWS_AS(moving_average(constant, 0.0), config_error);
}

TEST_CASE("exponential decay fit") {
    TimeSeries ts;
    for (int i = 0; i <= 30; ++i) {
        const double t = 0.25 * i;
        ts.t.push_back(t);
        ts.v.push_back(1.5 * std::exp(-t / 8.6));
    }
    const ExpDecayFit fit = fit_exponential_decay(ts, 2.0);
    CHECK(fit.amplitude == Catch::Approx(1.5).margin(1e-6));
    CHECK(fit.tau == Catch::Approx(8.6).margin(1e-6));
    CHECK(fit.tau_stderr < 1e-6);

    // interface fixture at the experimental magnitudes
    TimeSeries two_block;
    for (int i = 0; i <= 30; ++i) {
        const double t = 0.25 * i;
        two_block.t.push_back(t);
        two_block.v.push_back(1.4 * std::exp(-t / 7.1) * (1.0 + 0.01 * std::sin(3.0 * t)));
    }
    const ExpDecayFit noisy = fit_exponential_decay(two_block, 2.0);
    CHECK(noisy.tau == Catch::Approx(7.1).margin(0.2));
    CHECK(noisy.tau_stderr > 0.0);
    CHECK(noisy.tau_stderr < 0.5);

    TimeSeries constant{{0, 1, 2, 3, 4, 5}, {2.0, 2.0, 2.0, 2.0, 2.0, 2.0}};
    CHECK(std::isinf(fit_exponential_decay(constant, 0.0).tau));

    TimeSeries negative{{0, 1, 2, 3, 4}, {1.0, 0.5, -0.2, 0.1, 0.05}};
    CHECK_THROWS_AS(fit_exponential_decay(negative, 0.0), config_error);
    CHECK_THROWS_AS(fit_exponential_decay(ts, 7.2), config_error); // < 4 points
}
