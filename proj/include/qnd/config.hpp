#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnd/filter.hpp"
#include "qnd/presets.hpp"
#include "qnd/system.hpp"

namespace qnd {

/// Rejected configuration text; message carries line/column or field path.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

struct SweepAxes {
    std::vector<std::size_t> n_transmons;
    std::vector<double> p_loss;
    std::vector<double> eta;
    std::vector<double> gamma_phi;
    std::vector<std::string> shape;
};

/// One experiment: a chain (or sweep of chains), the analyses to run and
/// where to put the results. Every field has a default; resolved configs are
/// written back in canonical form (sorted keys, all defaults present).
struct ExperimentConfig {
    // chain
    std::string shape = "gaussian";  // preset supplying pulse, couplings, probe, window
    std::size_t n_transmons = 1;
    SourceKind source = SourceKind::cavity;
    double p_loss = 0.0;
    double eta = 1.0;
    double phi = 1.5707963267948966;
    double gamma_phi = 0.0;
    std::optional<double> omega_p;
    std::vector<TransmonParams> transmons;  // explicit per-transmon override
    Representation representation = Representation::reduced;
    // pulse overrides
    std::optional<double> pulse_gamma;
    std::optional<double> pulse_t_ph;
    std::string pulse_table;  // two-column (t, xi) file, replaces the preset shape
    // grid
    double dt = 1e-3;
    std::optional<double> t_end;
    // filter
    std::string filter_kind = "boxcar";
    std::optional<double> t_i, t_f;
    std::string filter_table;
    // analyses
    bool run_me = true;
    bool run_qrt = true;
    std::size_t n_traj = 0;  // 0 disables Monte Carlo
    std::uint64_t seed0 = 1;
    std::size_t workers = 1;
    bool keep_samples = false;
    double kernel_step = 0.0;  // > 0 exports the explicit two-time kernel
    double pair_target = 0.95;
    // optimizer
    std::vector<std::string> optimize_free;
    int optimize_sweeps = 50;
    int optimize_restarts = 3;
    // sweep
    SweepAxes sweep;
    std::string output_dir;
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Canonical, fully resolved JSON (sorted keys, two-space indent, LF).
std::string canonical_json(const ExperimentConfig& cfg);

/// One point of the sweep grid.
struct SweepPoint {
    std::string shape;
    std::size_t n_transmons;
    double p_loss;
    double eta;
    double gamma_phi;

    std::string tag() const;
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

ChainConfig resolve_chain(const ExperimentConfig& cfg, const SweepPoint& pt);
FilterSpec resolve_filter(const ExperimentConfig& cfg, const SweepPoint& pt);

}  // namespace qnd
