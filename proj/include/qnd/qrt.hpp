#pragma once

#include <iosfwd>
#include <vector>

#include "qnd/filter.hpp"
#include "qnd/system.hpp"

namespace qnd {

/// Filtered signal moments of both photon classes and the two SNR
/// conventions:
///   snr_main = E[S1] / sqrt(Var[S1] + t_m)
///   snr_sm   = (E[S1] - E[S0]) / sqrt(Var[S1] + Var[S0])
/// where t_m is the filter energy int f^2.
struct SnrResult {
    double mean1 = 0.0, var1 = 0.0;
    double mean0 = 0.0, var0 = 0.0;
    double filter_energy = 0.0;
    double snr_main = 0.0;
    double snr_sm = 0.0;
};

struct QrtOptions {
    double dt = 1e-3;
    /// Skip the vacuum run when the ground state is provably stationary.
    bool vacuum_shortcut = true;
};

/// Unconditional signal moments via the quantum regression theorem.
///
/// The double integral int int f f E[j j] is folded into a forward pass:
/// alongside rho we integrate Z' = L Z + f(t) Y(rho), Y(x) = e^{i phi} c x +
/// e^{-i phi} x c^dag, so that Z(t) = int^t f(t1) e^{L (t - t1)} Y(rho(t1)).
/// Then E[S^2] = int f^2 + 2 eta int f Tr[y Z]. Fock models propagate the
/// four-block hierarchy for both rho and Z.
SnrResult snr_deterministic(const SystemModel& model, const FilterSpec& filter, const QrtOptions& opts = {});

/// Single-class moments (photon = false gives the vacuum class).
struct SignalMoments {
    double mean = 0.0, var = 0.0, filter_energy = 0.0;
};
SignalMoments signal_moments(const SystemModel& model, const FilterSpec& filter, bool photon, const QrtOptions& opts = {});

/// E[j(t)] of the one-photon class sampled at t_k = k dt on [0, t_end];
/// used to tabulate matched filters.
std::vector<double> mean_current(const SystemModel& model, double dt, double t_end);

/// Replaces an untabulated matched filter by its table; other kinds are
/// returned unchanged.
FilterSpec tabulate_matched_filter(const SystemModel& model, const FilterSpec& filter, double dt);

/// E[j(t1) j(t2)] on a coarse grid, regular part only; the delta(t1 - t2)
/// part of unit weight is kept separately.
struct TwoTimeKernel {
    std::vector<double> grid;
    std::vector<double> values;  // row-major, grid.size()^2, symmetric
    double delta_mass = 1.0;
    double max_imaginary = 0.0;  // largest discarded imaginary part

    double at(std::size_t i, std::size_t j) const { return values[i * grid.size() + j]; }
    double symmetry_error() const;
};

/// Explicit kernel: each row propagates Y(rho(t1)) forward with the
/// generator. grid_step must be a multiple of dt.
TwoTimeKernel two_time_kernel(const SystemModel& model, double t_i, double t_f, double grid_step, double dt = 1e-3,
                              bool photon = true);

/// Filtered second moment from a kernel by the trapezoid rule, delta mass
/// added analytically: int f^2 + int int f f K.
double kernel_second_moment(const TwoTimeKernel& k, const FilterSpec& filter);

void write_kernel_csv(std::ostream& os, const TwoTimeKernel& k);

}  // namespace qnd
