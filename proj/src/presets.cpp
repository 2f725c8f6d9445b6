#include "qnd/presets.hpp"

#include <algorithm>

namespace qnd {

const std::vector<ShapePreset>& shape_presets() {
    static const std::vector<ShapePreset> presets = {
        {"gaussian", PulseKind::gaussian, 0.8, 4.0, {1.0, 1.9, 2.2, 2.5, 2.4, 2.5, 2.7, 3.2}, 0.12, 0.6813, 4.0, 8.0, 1.5, {}},
        {"decaying_exp", PulseKind::decaying_exp, 0.5, 4.0, {1.0, 1.6, 2.1, 2.5, 2.6, 2.9, 3.5, 3.8}, 0.16, 0.5272, 0.0, 0.0, 0.0,
         // found by maximising the QRT SNR over window start and end per N
         {{1.2, 4.8}, {0.8, 7.0}, {0.6, 8.8}, {0.6, 10.2}, {0.6, 11.3}, {0.6, 12.3}, {0.5, 13.1}, {0.5, 13.8}}},
        {"rising_exp", PulseKind::rising_exp, 0.5, 12.0, {1.0, 1.9, 2.3, 2.6, 3.0, 3.3, 3.5, 3.8}, 0.16, 0.5424, 0.0, 0.0, 0.0,
         {{9.7, 13.4}, {9.9, 15.3}, {10.1, 16.8}, {10.3, 18.1}, {10.5, 19.1}, {10.6, 19.9}, {10.7, 20.7}, {10.8, 21.5}}},
    };
    return presets;
}

const ShapePreset& shape_preset(const std::string& name) {
    for (const auto& p : shape_presets()) {
        if (p.name == name) return p;
    }
    throw InvalidInput("unknown shape preset '" + name + "' (expected gaussian, decaying_exp or rising_exp)");
}

const ShapePreset& shape_preset(PulseKind kind) {
    for (const auto& p : shape_presets()) {
        if (p.kind == kind) return p;
    }
    throw InvalidInput("no preset for pulse kind " + to_string(kind));
}

double preset_gamma_c(const ShapePreset& p, std::size_t k) {
    if (k == 0) throw InvalidInput("transmon index is 1-based");
    return p.gamma_c[std::min(k, p.gamma_c.size()) - 1];
}

FilterSpec preset_window(const ShapePreset& p, std::size_t n) {
    n = std::max<std::size_t>(n, 1);
    if (!p.windows.empty()) {
        const std::size_t m = p.windows.size();
        if (n <= m) return FilterSpec::boxcar(p.windows[n - 1].first, p.windows[n - 1].second);
        const double step = m > 1 ? p.windows[m - 1].second - p.windows[m - 2].second : 1.0;
        return FilterSpec::boxcar(p.windows[m - 1].first, p.windows[m - 1].second + step * static_cast<double>(n - m));
    }
    return FilterSpec::boxcar(p.t_i, p.t_f0 + p.t_f_step * static_cast<double>(n - 1));
}

double preset_t_end(const ShapePreset& p, std::size_t n) {
    const double window_end = preset_window(p, n).t_f + 4.0;
    double pulse_end = p.t_ph + 4.0;
    if (p.kind == PulseKind::gaussian) pulse_end = p.t_ph + 12.0 / p.gamma_ph;
    return std::max(window_end, pulse_end);
}

PulseShape preset_pulse(const ShapePreset& p, double t_end) {
    switch (p.kind) {
        case PulseKind::gaussian: return PulseShape::gaussian(p.gamma_ph, p.t_ph, t_end);
        case PulseKind::decaying_exp: return PulseShape::decaying_exp(p.gamma_ph, p.t_ph, t_end);
        case PulseKind::rising_exp: return PulseShape::rising_exp(p.gamma_ph, p.t_ph, t_end);
        case PulseKind::tabulated: break;
    }
    throw InvalidInput("tabulated pulses have no preset");
}

ChainConfig preset_chain(const ShapePreset& p, std::size_t n, const ChainOverrides& o) {
    if (n == 0) throw InvalidInput("chain needs at least one transmon");
    ChainConfig c;
    for (std::size_t k = 1; k <= n; ++k) {
        TransmonParams t;
        t.gamma_c = preset_gamma_c(p, k);
        t.gamma_p = 2.0 * t.gamma_c;
        t.gamma_phi = o.gamma_phi;
        c.transmons.push_back(t);
    }
    c.source = o.source;
    c.pulse = preset_pulse(p, preset_t_end(p, n));
    c.probe_amplitude = std::sqrt(p.omega_p_sq);
    c.p_loss = o.p_loss;
    c.eta = o.eta;
    c.representation = o.representation;
    return c;
}

}  // namespace qnd
