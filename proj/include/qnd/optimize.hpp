#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qnd/filter.hpp"
#include "qnd/presets.hpp"
#include "qnd/system.hpp"

namespace qnd {

struct ParamBound {
    std::string name;
    double lo;
    double hi;
    double step;  // initial probe step
};

struct OptimizerOptions {
    int max_sweeps = 50;
    int restarts = 3;              // extra starts perturbed from x0
    std::uint64_t seed = 12345;    // restart perturbations
    double min_step_fraction = 1e-3;  // stop once every step is below this fraction of its range
    double rel_tol = 1e-6;
};

struct OptimizerResult {
    std::vector<double> x;
    double value = 0.0;
    double start_value = 0.0;
    int evaluations = 0;
    int sweeps = 0;
    std::vector<std::vector<double>> trace_x;  // accepted iterates
    std::vector<double> trace_value;
};

/// Bounded coordinate ascent with three-point parabolic refinement. The
/// first start is x0 itself; restarts are deterministic perturbations of it.
/// Non-finite objective values shrink the probe step; if the starting point
/// itself is non-finite the search aborts with InvalidInput.
OptimizerResult maximize(const std::function<double(const std::vector<double>&)>& objective, std::vector<double> x0,
                         const std::vector<ParamBound>& bounds, const OptimizerOptions& opts = {});

/// Free parameters of a chain: gamma_c2..gamma_cN (per transmon), gamma_p_ratio
/// (Gamma_p / Gamma_c for all), delta_c, delta_p (all transmons), omega_p,
/// t_i, t_f.
struct ChainParameters {
    std::vector<std::string> names;
    std::vector<ParamBound> bounds;
    std::vector<double> start;
};

ChainParameters chain_parameters(const ChainConfig& cfg, const FilterSpec& window, const std::vector<std::string>& names);

/// Applies the parameter vector to copies of cfg and window.
void apply_parameters(const ChainParameters& p, const std::vector<double>& x, ChainConfig& cfg, FilterSpec& window);

struct ChainOptimization {
    OptimizerResult result;
    ChainConfig config;
    FilterSpec window;
};

/// Maximises the deterministic SNR over the named parameters.
ChainOptimization optimize_chain(const ChainConfig& cfg, const FilterSpec& window, const std::vector<std::string>& names,
                                 const OptimizerOptions& opts = {}, double dt = 1e-2);

}  // namespace qnd
