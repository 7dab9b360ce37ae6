#pragma once

#include <cmath>
#include <vector>

#include "starkmbl/krylov.hpp"
#include "starkmbl/operators.hpp"

namespace starkmbl {

struct TrotterSettings {
    double dt1 = 0.0; // couplings + bias segment duration, tJ0
    double dt2 = 0.0; // local-field segment duration, tJ0
    int cycles = 0;

    void validate() const {
        if (!(dt1 > 0.0) || !(dt2 > 0.0))
            throw config_error("trotter segment durations must be positive");
    }
};

/// Symmetrized stroboscopic cycle
///   exp(-i dt2/2 H2) exp(-i dt1 H1) exp(-i dt2/2 H2)
/// with H1 = sum J sigma^x sigma^x + bz0 sum sigma^z and H2 = sum (f_local_j
/// + bz0) sigma^z_j. The bias rides in every segment (it comes from a rotating
/// frame that covers the whole evolution), so the time-averaged generator is
///   dt1/(dt1+dt2) * couplings + [bz0 + dt2/(dt1+dt2) * f_local] * sigma^z
/// with bz0 unweighted, up to O(dt^3) per cycle.
class TrotterCycle {
  public:
    TrotterCycle(const CouplingMatrix& c, const FieldProfile& f_local, double bz0,
                 TrotterSettings settings, KrylovSettings krylov = {})
        : couplings_(c), f_local_(f_local), bz0_(bz0), settings_(settings), krylov_(krylov) {
        settings_.validate();
        krylov_.validate();
        if (c.n != f_local.n()) throw config_error("trotter_cycle: dimension mismatch");
        h1_ = build_ising(c, linear_field(c.n, bz0, 0.0));
        const basis_t dim = h1_.dimension;
        half_phase_.resize(dim);
        for (basis_t b = 0; b < dim; ++b) {
            double e = 0.0;
            for (int j = 1; j <= c.n; ++j) e += (f_local_.at(j) + bz0_) * sz_of(b, j);
            half_phase_[b] = std::polar(1.0, -0.5 * settings_.dt2 * e);
        }
    }

    double cycle_duration() const { return settings_.dt1 + settings_.dt2; }
    const TrotterSettings& settings() const { return settings_; }

    /// One symmetrized cycle, in place.
    void advance(StateVector& psi) const {
        if (psi.dim() != h1_.dimension) throw config_error("trotter advance: dimension mismatch");
        apply_half_phase(psi);
        psi = krylov_evolve(h1_, psi, settings_.dt1, krylov_);
        apply_half_phase(psi);
    }

    /// The generator the cycle averages to.
    SparseOperator averaged_hamiltonian() const {
        const double total = cycle_duration();
        const double w1 = settings_.dt1 / total;
        const double w2 = settings_.dt2 / total;
        CouplingMatrix c = couplings_;
        for (double& v : c.v) v *= w1;
        std::vector<double> bz(static_cast<std::size_t>(couplings_.n));
        for (int j = 1; j <= couplings_.n; ++j)
            bz[static_cast<std::size_t>(j - 1)] = bz0_ + w2 * f_local_.at(j);
        return build_ising(c, FieldProfile(std::move(bz)));
    }

    /// Local-field strength that makes the averaged profile equal a target
    /// profile: f_local = (target - bz0) * (dt1+dt2)/dt2.
    static FieldProfile local_field_for_target(const FieldProfile& target, double bz0,
                                               const TrotterSettings& s) {
        s.validate();
        const double scale = (s.dt1 + s.dt2) / s.dt2;
        std::vector<double> bz(static_cast<std::size_t>(target.n()));
        for (int j = 1; j <= target.n(); ++j)
            bz[static_cast<std::size_t>(j - 1)] = (target.at(j) - bz0) * scale;
        return FieldProfile(std::move(bz));
    }

    /// Coupling strength that makes the averaged couplings equal a target:
    /// c_inst = c_target * (dt1+dt2)/dt1.
    static CouplingMatrix couplings_for_target(const CouplingMatrix& target,
                                               const TrotterSettings& s) {
        s.validate();
        const double scale = (s.dt1 + s.dt2) / s.dt1;
        CouplingMatrix c = target;
        for (double& v : c.v) v *= scale;
        return c;
    }

  private:
    void apply_half_phase(StateVector& psi) const {
        for (basis_t b = 0; b < psi.dim(); ++b) psi.amps[b] *= half_phase_[b];
    }

    CouplingMatrix couplings_;
    FieldProfile f_local_;
    double bz0_;
    TrotterSettings settings_;
    KrylovSettings krylov_;
    SparseOperator h1_;
    std::vector<cplx> half_phase_;
};

/// tJ0 for a physical duration in microseconds at nearest-neighbor rate
/// J0/2pi = j0_khz kilohertz.
inline double us_to_tj0(double t_us, double j0_khz) {
    if (!(j0_khz > 0.0)) throw config_error("j0_khz must be positive");
    return 2.0 * M_PI * j0_khz * 1e-3 * t_us;
}

/// Field or frequency quoted in kHz, in units of J0.
inline double khz_to_j0(double f_khz, double j0_khz) {
    if (!(j0_khz > 0.0)) throw config_error("j0_khz must be positive");
    return f_khz / j0_khz;
}

} // namespace starkmbl
