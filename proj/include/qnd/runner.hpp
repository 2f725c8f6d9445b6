#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qnd/config.hpp"

namespace qnd {

std::string code_version();

/// $QND_OUTPUT_ROOT, or "qnd-out" when unset.
std::string default_output_root();

/// Outcome of one orchestrated run. The directory always holds
/// manifest.json; when complete is false it lists the error and whatever
/// files were finished before it.
struct RunSummary {
    std::string dir;
    bool complete = false;
    std::string error;
    std::vector<std::string> files;
};

/// Runs every sweep point of `cfg` (ME trajectory, QRT SNR, Monte Carlo
/// statistics as configured) and writes resolved_config.json, results.csv,
/// summary.json, per-point tables and manifest.json into `out_dir`.
/// Points are spread over cfg.workers threads; outputs do not depend on it.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream* log = nullptr);

/// Maximises the QRT SNR of the first sweep point over cfg.optimize_free.
/// Writes optimum.json, trace.csv, resolved_config.json and manifest.json.
RunSummary optimize_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream* log = nullptr);

struct ReproduceOptions {
    std::size_t n_traj = 2000;
    std::uint64_t seed0 = 1;
    double dt = 1e-3;
    std::size_t workers = 1;
    std::vector<double> p_loss;     // fig3b / sm-circloss axis
    std::vector<double> eta;        // fig3c axis
    std::vector<double> gamma_phi;  // sm-dephasing axis
    std::string shape;              // empty: the figure's own shape
    std::size_t n_max = 0;          // 0: the figure's own N range
};

const std::vector<std::string>& figure_ids();

/// Canned configuration for one figure; throws InvalidInput for an unknown id.
RunSummary reproduce(const std::string& figure_id, const ReproduceOptions& opts, const std::string& out_dir,
                     std::ostream* log = nullptr);

/// Envelope distortion of the transmitted photon: 1 - max over delays of the
/// overlap int sqrt(F_out(t) F_in(t - tau)) dt of the two unit-area flux
/// profiles. 0 for a merely delayed copy.
double envelope_distortion(const std::vector<double>& t, const std::vector<double>& flux_in,
                           const std::vector<double>& flux_out);

}  // namespace qnd
