#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "qnd/filter.hpp"
#include "qnd/system.hpp"

namespace qnd {

/// One homodyne record. j[k] is the current on [t_k, t_k + dt), so a
/// filtered signal is S = sum_k f(t_k) j[k] dt.
struct HomodyneRecord {
    std::uint64_t seed = 0;
    double dt = 1e-3;
    int photons = 1;
    double eta = 1.0;
    double phi = 0.0;
    std::vector<double> j;              // empty unless samples were kept
    std::vector<double> signals;        // one per requested filter
    std::vector<double> conditioned_y;  // <y> of the conditioned state, if requested
    bool valid = true;
};

struct SMEOptions {
    double dt = 1e-3;
    /// NaN: run to the latest filter end (or the pulse end without filters).
    double t_end = std::numeric_limits<double>::quiet_NaN();
    std::vector<FilterSpec> filters;  // matched filters must be tabulated
    bool keep_samples = false;
    bool keep_conditioned_y = false;
    double trace_tolerance = 1e-3;
    /// Vacuum runs whose ground state is stationary only draw noise.
    bool vacuum_shortcut = true;
};

/// Euler-Maruyama integration of the homodyne SME
///   d rho = L rho dt + sqrt(eta) (Y(rho) - <y> rho) dW,  j dt = sqrt(eta) <y> dt + dW,
/// renormalised after every step. Fock models drive all hierarchy blocks with
/// the same dW and take expectations from r11. The noise path is fixed by
/// (seed, photon number).
HomodyneRecord simulate_trajectory(const SystemModel& model, bool photon, std::uint64_t seed, const SMEOptions& opts);

struct BatchResult {
    std::vector<HomodyneRecord> records;  // records[i] has seed seed0 + i
    std::size_t invalid = 0;
};

/// Runs seeds seed0 .. seed0 + n_traj - 1 on `workers` threads (0: hardware
/// concurrency). Records do not depend on the worker count.
BatchResult run_batch(const SystemModel& model, bool photon, std::size_t n_traj, std::uint64_t seed0,
                      const SMEOptions& opts, std::size_t workers = 1);

/// Signals of filter `index` from the valid records.
std::vector<double> batch_signals(const BatchResult& batch, std::size_t index);

/// CSV (t, j) of one record with kept samples.
void write_record_csv(std::ostream& os, const HomodyneRecord& rec);

}  // namespace qnd
