#include "qnd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qnd/qrt.hpp"

namespace qnd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Search {
    const std::function<double(const std::vector<double>&)>& f;
    const std::vector<ParamBound>& bounds;
    const OptimizerOptions& opts;
    OptimizerResult& out;

    double eval(const std::vector<double>& x) {
        ++out.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : kNegInf;
    }

    double clip(std::size_t i, double v) const { return std::clamp(v, bounds[i].lo, bounds[i].hi); }

    // One coordinate-ascent run from x; returns the final value.
    double run(std::vector<double>& x, double fx) {
        std::vector<double> steps;
        for (const auto& b : bounds) steps.push_back(b.step);
        for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            ++out.sweeps;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double h = steps[i];
                const double xi = x[i];
                std::vector<double> cand = x;
                double best_v = fx, best_x = xi;
                auto probe = [&](double v) {
                    v = clip(i, v);
                    if (v == xi) return kNegInf;
                    cand[i] = v;
                    const double fv = eval(cand);
                    if (fv > best_v) {
                        best_v = fv;
                        best_x = v;
                    }
                    return fv;
                };
                const double fp = probe(xi + h);
                const double fm = probe(xi - h);
                if (!std::isfinite(fp) && !std::isfinite(fm) && xi + h <= bounds[i].hi && xi - h >= bounds[i].lo) {
                    steps[i] *= 0.5;  // non-finite neighbourhood: shrink and retry next sweep
                    continue;
                }
                // Parabola through (xi - h, fm), (xi, fx), (xi + h, fp).
                if (std::isfinite(fp) && std::isfinite(fm) && clip(i, xi + h) == xi + h && clip(i, xi - h) == xi - h) {
                    const double curv = fp - 2.0 * fx + fm;
                    if (curv < 0.0) {
                        const double vertex = xi + 0.5 * h * (fm - fp) / curv;
                        const double lim = std::clamp(vertex, xi - 2.0 * h, xi + 2.0 * h);
                        if (std::abs(lim - xi) > 1e-12 * (1.0 + std::abs(xi))) probe(lim);
                    }
                }
                if (best_v > fx + opts.rel_tol * std::abs(fx)) {
                    const double moved = std::abs(best_x - xi);
                    x[i] = best_x;
                    fx = best_v;
                    steps[i] = std::max(std::min(moved, 2.0 * h), 0.5 * h);
                    out.trace_x.push_back(x);
                    out.trace_value.push_back(fx);
                } else {
                    steps[i] *= 0.5;
                }
            }
            bool small = true;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (steps[i] > opts.min_step_fraction * (bounds[i].hi - bounds[i].lo)) small = false;
            }
            if (small) break;
        }
        return fx;
    }
};

}  // namespace

OptimizerResult maximize(const std::function<double(const std::vector<double>&)>& objective, std::vector<double> x0,
                         const std::vector<ParamBound>& bounds, const OptimizerOptions& opts) {
    if (x0.size() != bounds.size()) throw InvalidInput("one bound per parameter is required");
    for (const auto& b : bounds) {
        if (!(b.hi >= b.lo) || !(b.step > 0.0)) throw InvalidInput("invalid bound for parameter '" + b.name + "'");
    }
    OptimizerResult out;
    Search s{objective, bounds, opts, out};
    for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = s.clip(i, x0[i]);
    const double f0 = s.eval(x0);
    if (!std::isfinite(f0)) throw InvalidInput("objective is not finite at the starting point");
    out.start_value = f0;
    out.trace_x.push_back(x0);
    out.trace_value.push_back(f0);

    std::vector<double> x = x0;
    double fx = s.run(x, f0);
    out.x = x;
    out.value = fx;

    std::mt19937_64 gen(opts.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int r = 0; r < opts.restarts; ++r) {
        std::vector<double> xr = x0;
        for (std::size_t i = 0; i < xr.size(); ++i) xr[i] = s.clip(i, xr[i] + 2.0 * bounds[i].step * u(gen));
        const double fr0 = s.eval(xr);
        if (!std::isfinite(fr0)) continue;
        const double fr = s.run(xr, fr0);
        if (fr > out.value) {
            out.value = fr;
            out.x = xr;
        }
    }
    return out;
}

ChainParameters chain_parameters(const ChainConfig& cfg, const FilterSpec& window, const std::vector<std::string>& names) {
    ChainParameters p;
    const std::size_t n = cfg.n_transmons();
    auto add = [&](const std::string& name, double lo, double hi, double step, double start) {
        p.names.push_back(name);
        p.bounds.push_back({name, lo, hi, step});
        p.start.push_back(std::clamp(start, lo, hi));
    };
    for (const auto& name : names) {
        if (name == "gamma_c") {
            for (std::size_t k = 2; k <= n; ++k) add("gamma_c" + std::to_string(k), 0.2, 8.0, 0.2, cfg.transmons[k - 1].gamma_c);
        } else if (name.rfind("gamma_c", 0) == 0 && name.size() > 7) {
            const std::size_t k = std::stoul(name.substr(7));
            if (k < 2 || k > n) throw InvalidInput("parameter '" + name + "' does not name a transmon 2..N");
            add(name, 0.2, 8.0, 0.2, cfg.transmons[k - 1].gamma_c);
        } else if (name == "gamma_p_ratio") {
            add(name, 0.25, 6.0, 0.2, cfg.transmons[0].gamma_p / cfg.transmons[0].gamma_c);
        } else if (name == "delta_c") {
            add(name, -2.0, 2.0, 0.1, cfg.transmons[0].delta_c);
        } else if (name == "delta_p") {
            add(name, -2.0, 2.0, 0.1, cfg.transmons[0].delta_p);
        } else if (name == "omega_p") {
            add(name, 0.02, 1.5, 0.05, cfg.probe_amplitude);
        } else if (name == "t_i") {
            add(name, 0.0, cfg.pulse.t_end(), 0.25, window.t_i);
        } else if (name == "t_f") {
            add(name, 0.0, cfg.pulse.t_end(), 0.25, window.t_f);
        } else {
            throw InvalidInput("unknown free parameter '" + name +
                               "' (expected gamma_c, gamma_cK, gamma_p_ratio, delta_c, delta_p, omega_p, t_i, t_f)");
        }
    }
    return p;
}

void apply_parameters(const ChainParameters& p, const std::vector<double>& x, ChainConfig& cfg, FilterSpec& window) {
    std::vector<double> ratio;
    for (const auto& t : cfg.transmons) ratio.push_back(t.gamma_p / t.gamma_c);
    for (std::size_t i = 0; i < p.names.size(); ++i) {
        const auto& name = p.names[i];
        const double v = x[i];
        if (name.rfind("gamma_c", 0) == 0) {
            const std::size_t k = std::stoul(name.substr(7));
            cfg.transmons[k - 1].gamma_c = v;
        } else if (name == "gamma_p_ratio") {
            std::fill(ratio.begin(), ratio.end(), v);
        } else if (name == "delta_c") {
            for (auto& t : cfg.transmons) t.delta_c = v;
        } else if (name == "delta_p") {
            for (auto& t : cfg.transmons) t.delta_p = v;
        } else if (name == "omega_p") {
            cfg.probe_amplitude = v;
        } else if (name == "t_i") {
            window.t_i = v;
        } else if (name == "t_f") {
            window.t_f = v;
        }
    }
    for (std::size_t k = 0; k < cfg.transmons.size(); ++k) cfg.transmons[k].gamma_p = ratio[k] * cfg.transmons[k].gamma_c;
}

ChainOptimization optimize_chain(const ChainConfig& cfg, const FilterSpec& window, const std::vector<std::string>& names,
                                 const OptimizerOptions& opts, double dt) {
    const ChainParameters params = chain_parameters(cfg, window, names);
    QrtOptions q;
    q.dt = dt;
    auto objective = [&](const std::vector<double>& x) {
        ChainConfig c = cfg;
        FilterSpec w = window;
        apply_parameters(params, x, c, w);
        if (!(w.t_f - w.t_i >= 10.0 * dt) || w.t_i < 0.0) return std::numeric_limits<double>::quiet_NaN();
        return snr_deterministic(build_chain(c), w, q).snr_main;
    };
    ChainOptimization out;
    out.result = maximize(objective, params.start, params.bounds, opts);
    out.config = cfg;
    out.window = window;
    apply_parameters(params, out.result.x, out.config, out.window);
    return out;
}

}  // namespace qnd
