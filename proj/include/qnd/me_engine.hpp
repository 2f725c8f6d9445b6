#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

#include "qnd/generator.hpp"
#include "qnd/system.hpp"

namespace qnd {

struct DensityMatrix {
    Matrix rho;
    double t = 0.0;
};

/// Generalised density matrices of the single-photon Fock formalism.
/// r10 is always r01^dagger.
struct GDMHierarchy {
    Matrix r00, r01, r10, r11;
    double t = 0.0;
};

/// Flat state of the integrator: matrix blocks plus real scalars that are
/// integrated alongside (running integrals).
struct OdeState {
    std::vector<Matrix> m;
    std::vector<double> s;

    void set_zero_like(const OdeState& other);
    /// this += a * x
    void axpy(double a, const OdeState& x);
};

/// Right-hand side of the unconditional dynamics for either source
/// formalism. Cavity models carry one block (rho); Fock models carry three
/// (r00, r01, r11), r10 being implied by adjoint symmetry.
class Dynamics {
public:
    explicit Dynamics(const SystemModel& model, bool photon = true);

    const SystemModel& model() const { return model_; }
    const Generator& generator() const { return generator_; }
    bool fock() const { return model_.is_fock(); }
    bool photon() const { return photon_; }
    std::size_t blocks() const { return fock() ? 3 : 1; }

    /// Wavepacket amplitude driving the hierarchy (0 for cavity models or
    /// for the vacuum run).
    double xi(double t) const;

    std::vector<Matrix> initial_state() const;

    /// out[0..blocks) = generator applied to x[0..blocks).
    void apply(const Generator::Frozen& f, double xi, const Matrix* x, Matrix* out, Matrix& work) const;

    /// State block that carries expectations (rho or r11).
    std::size_t top_block() const { return fock() ? 2 : 0; }

    /// Mean output photon flux of the control line.
    double flux(double t, const Matrix* x) const;

    /// Source-cavity decay rate kappa(t); 0 for Fock models.
    double source_rate(double t) const;

private:
    SystemModel model_;
    Generator generator_;
    bool photon_ = true;
    Matrix source_op_;  // envelope-carrying part of the control channel (cavity)
};

/// Classical RK4 with the generator frozen at the three distinct stage
/// times of each step; the end-point evaluation is reused by the next step.
/// Steps where the source cavity empties fast (kappa * dt above
/// kMaxKappaStep, typically just before an exponential cut-off) are split
/// into equal sub-steps so the outer grid stays fixed.
class Rk4Propagator {
public:
    static constexpr double kMaxKappaStep = 0.05;
    static constexpr std::size_t kMaxSubsteps = 256;

    Rk4Propagator(const Dynamics& dyn, double dt) : dyn_(&dyn), dt_(dt) {}

    double dt() const { return dt_; }

    /// rhs(t, frozen, xi, x, dx) fills dx (already shaped like x).
    template <typename Rhs>
    void step(OdeState& x, double t, Rhs&& rhs) {
        const double h = dt_;
        double kappa = 0.0;
        if (!dyn_->fock()) {
            kappa = std::max({dyn_->source_rate(t), dyn_->source_rate(t + 0.5 * h), dyn_->source_rate(t + h)});
        }
        const auto m = static_cast<std::size_t>(std::ceil(kappa * h / kMaxKappaStep));
        if (m <= 1) {
            substep(x, t, h, rhs);
            return;
        }
        const std::size_t n = std::min(m, kMaxSubsteps);
        const double hs = h / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) substep(x, t + static_cast<double>(i) * hs, hs, rhs);
    }

private:
    template <typename Rhs>
    void substep(OdeState& x, double t, double h, Rhs&& rhs) {
        if (!(cached_end_ == t)) {
            dyn_->generator().freeze(t, f_[0]);
        } else {
            std::swap(f_[0], f_[2]);
        }
        dyn_->generator().freeze(t + 0.5 * h, f_[1]);
        dyn_->generator().freeze(t + h, f_[2]);
        cached_end_ = t + h;
        const double x0 = dyn_->xi(t), x1 = dyn_->xi(t + 0.5 * h), x2 = dyn_->xi(t + h);

        k1_.set_zero_like(x);
        k2_.set_zero_like(x);
        k3_.set_zero_like(x);
        k4_.set_zero_like(x);
        tmp_.set_zero_like(x);

        rhs(t, f_[0], x0, x, k1_);
        tmp_ = x;
        tmp_.axpy(0.5 * h, k1_);
        rhs(t + 0.5 * h, f_[1], x1, tmp_, k2_);
        tmp_ = x;
        tmp_.axpy(0.5 * h, k2_);
        rhs(t + 0.5 * h, f_[1], x1, tmp_, k3_);
        tmp_ = x;
        tmp_.axpy(h, k3_);
        rhs(t + h, f_[2], x2, tmp_, k4_);

        x.axpy(h / 6.0, k1_);
        x.axpy(h / 3.0, k2_);
        x.axpy(h / 3.0, k3_);
        x.axpy(h / 6.0, k4_);
    }

    const Dynamics* dyn_;
    double dt_;
    double cached_end_ = std::numeric_limits<double>::quiet_NaN();
    Generator::Frozen f_[3];
    OdeState k1_, k2_, k3_, k4_, tmp_;
};

/// Number of whole steps of size dt covering [0, t_end].
std::size_t step_count(double t_end, double dt);

struct MEOptions {
    double dt = 1e-3;
    double t_end = std::numeric_limits<double>::quiet_NaN();  ///< NaN: pulse t_end
    bool photon = true;               ///< false: vacuum (0-photon) input
    std::size_t record_every = 1;     ///< decimation of the stored observables
    std::size_t positivity_every = 200;
    double trace_tolerance = 1e-6;
    /// Called with (t, blocks) after every step and at t = 0.
    std::function<void(double, const std::vector<Matrix>&)> observer;
};

struct InvariantReport {
    double max_trace_drift = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    double max_adjoint_error = 0.0;  ///< Fock only: |r01 - r10^dagger|, 0 by construction
};

/// Sampled observables of a deterministic run.
struct MERecord {
    std::vector<double> t;
    std::vector<double> y;  ///< Re <y>
    std::vector<std::vector<double>> p_exc;  ///< [transmon][sample]
    std::vector<double> trace;
    std::vector<double> flux;
    std::vector<double> integrated_flux;
    InvariantReport invariants;
    std::vector<Matrix> final_blocks;
};

MERecord evolve_me(const SystemModel& model, const MEOptions& opts = {});
MERecord evolve_cavity_me(const SystemModel& model, const MEOptions& opts = {});
MERecord evolve_fock_me(const SystemModel& model, const MEOptions& opts = {});

GDMHierarchy to_hierarchy(const std::vector<Matrix>& blocks, double t);

/// Output flux of the control line for a hierarchy state.
double output_flux(const SystemModel& model, const GDMHierarchy& h, double xi);
/// Trapezoidal integral of a sampled flux record.
double integrated_flux(const std::vector<double>& t, const std::vector<double>& flux);

/// True when the all-ground state (vacuum input) is a fixed point of the
/// generator on [0, t_end] and carries no homodyne signal.
bool ground_state_stationary(const SystemModel& model, double t_end);

SystemModel add_dephasing(const SystemModel& model, const std::vector<double>& gamma_phi);

/// CSV columns: t, y, p_exc_1..N, trace, flux, integrated_flux.
void write_trajectory_csv(std::ostream& os, const MERecord& rec);

}  // namespace qnd
