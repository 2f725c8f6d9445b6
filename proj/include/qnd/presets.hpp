#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qnd/filter.hpp"
#include "qnd/pulse.hpp"
#include "qnd/system.hpp"

namespace qnd {

/// One row of the published parameter table: pulse, first-eight couplings,
/// probe strength and the fitted sqrt(N) slope.
struct ShapePreset {
    std::string name;
    PulseKind kind;
    double gamma_ph;
    double t_ph;
    std::vector<double> gamma_c;  // transmons 1..8
    double omega_p_sq;
    double chi;
    /// Probe window t_i and t_f = t_f0 + t_f_step (N - 1), unless a per-N
    /// table is given; past the table the last increment of t_f is repeated.
    double t_i;
    double t_f0;
    double t_f_step;
    std::vector<std::pair<double, double>> windows;
};

const std::vector<ShapePreset>& shape_presets();
const ShapePreset& shape_preset(const std::string& name);
const ShapePreset& shape_preset(PulseKind kind);

/// Gamma_c of transmon k (1-based); beyond the tabulated eight the last
/// value is repeated.
double preset_gamma_c(const ShapePreset& p, std::size_t k);

FilterSpec preset_window(const ShapePreset& p, std::size_t n_transmons);

/// Simulation end: window end plus a 4-unit margin, and never before the
/// pulse has been emitted.
double preset_t_end(const ShapePreset& p, std::size_t n_transmons);

PulseShape preset_pulse(const ShapePreset& p, double t_end);

struct ChainOverrides {
    SourceKind source = SourceKind::cavity;
    double p_loss = 0.0;
    double eta = 1.0;
    double gamma_phi = 0.0;
    Representation representation = Representation::reduced;
};

ChainConfig preset_chain(const ShapePreset& p, std::size_t n_transmons, const ChainOverrides& o = {});

}  // namespace qnd
