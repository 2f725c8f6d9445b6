#include "qnd/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qnd/detection.hpp"
#include "qnd/io.hpp"
#include "qnd/me_engine.hpp"
#include "qnd/optimize.hpp"
#include "qnd/qrt.hpp"
#include "qnd/rng.hpp"
#include "qnd/sme_engine.hpp"

#ifndef QND_VERSION
#define QND_VERSION "0.1.0"
#endif

namespace qnd {

using nlohmann::json;
namespace fs = std::filesystem;

std::string code_version() { return QND_VERSION; }

std::string default_output_root() {
    const char* env = std::getenv("QND_OUTPUT_ROOT");
    return (env && *env) ? std::string(env) : std::string("qnd-out");
}

namespace {

// Output directory plus the list of files written into it.
class Artifact {
public:
    explicit Artifact(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void write(const std::string& name, const std::string& content) {
        const fs::path p = fs::path(dir_) / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
        out << content;
        if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
        std::lock_guard<std::mutex> lock(mu_);
        files_.push_back(name);
    }

    void json_file(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    RunSummary finish(const std::string& command, const std::string& error, json extra = json::object()) {
        RunSummary s;
        s.dir = dir_;
        s.complete = error.empty();
        s.error = error;
        {
            std::lock_guard<std::mutex> lock(mu_);
            std::sort(files_.begin(), files_.end());
            s.files = files_;
        }
        json m = std::move(extra);
        m["code_version"] = code_version();
        m["rng"] = Philox4x32::kName;
        m["command"] = command;
        m["status"] = s.complete ? "complete" : "partial";
        m["error"] = error;
        m["files"] = s.files;
        const fs::path p = fs::path(dir_) / "manifest.json";
        std::ofstream out(p, std::ios::binary);
        out << m.dump(2) << "\n";
        return s;
    }

    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::mutex mu_;
    std::vector<std::string> files_;
};

// Runs fn(i) for i < n on up to `workers` threads. The first exception is
// rethrown after all threads stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto work = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        s += cells[i];
    }
    return s + "\n";
}

std::string fmt(double v) { return format_double(v); }

std::size_t decimation(double dt, double sample = 0.01) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sample / dt)));
}

std::string trajectory_csv(const MERecord& rec) {
    std::ostringstream os;
    write_trajectory_csv(os, rec);
    return os.str();
}

// Table of all filtered signals, one row per valid record.
std::string signals_csv(const std::vector<double>& s0, const std::vector<double>& s1) {
    std::string out = "photons,signal\n";
    for (double v : s0) out += "0," + fmt(v) + "\n";
    for (double v : s1) out += "1," + fmt(v) + "\n";
    return out;
}

struct McOutcome {
    DetectionSummary summary;
    std::vector<double> s0, s1;
};

McOutcome monte_carlo(const SystemModel& model, const FilterSpec& filter, std::size_t n_traj, std::uint64_t seed0,
                      double dt, std::size_t workers, double pair_target) {
    SMEOptions o;
    o.dt = dt;
    o.filters = {filter.kind == FilterKind::matched ? tabulate_matched_filter(model, filter, dt) : filter};
    McOutcome r;
    const BatchResult b1 = run_batch(model, true, n_traj, seed0, o, workers);
    const BatchResult b0 = run_batch(model, false, n_traj, seed0, o, workers);
    r.s1 = batch_signals(b1, 0);
    r.s0 = batch_signals(b0, 0);
    double t_m = 0.0;
    {
        // filter energy on the same grid the signals use
        const std::size_t steps = step_count(filter.t_f, dt);
        for (std::size_t k = 0; k < steps; ++k) {
            const double w = o.filters[0].weight(static_cast<double>(k) * dt);
            t_m += w * w * dt;
        }
    }
    r.summary = summarize(r.s0, r.s1, t_m, pair_target);
    r.summary.invalid = b0.invalid + b1.invalid;
    return r;
}

json snr_json(const SnrResult& r) {
    return {{"mean1", r.mean1},   {"var1", r.var1},         {"mean0", r.mean0},  {"var0", r.var0},
            {"t_m", r.filter_energy}, {"snr_main", r.snr_main}, {"snr_sm", r.snr_sm}};
}

ChainConfig figure_chain(const std::string& shape, std::size_t n, SourceKind source = SourceKind::cavity,
                         double p_loss = 0.0, double eta = 1.0, double gamma_phi = 0.0) {
    ChainOverrides o;
    o.source = source;
    o.p_loss = p_loss;
    o.eta = eta;
    o.gamma_phi = gamma_phi;
    return preset_chain(shape_preset(shape), n, o);
}

FilterSpec figure_window(const std::string& shape, std::size_t n) { return preset_window(shape_preset(shape), n); }

SnrResult qrt_snr(const ChainConfig& c, const FilterSpec& w, double dt) {
    QrtOptions q;
    q.dt = dt;
    return snr_deterministic(build_chain(c), w, q);
}

// Each transmon delays the photon; long enough for the last one to let it through.
double flux_t_end(const ChainConfig& ch) {
    return std::max(ch.pulse.t_end(), ch.pulse.t_ph() + 8.0 + 3.0 * static_cast<double>(ch.n_transmons()));
}

MERecord me_run(const SystemModel& model, double dt, bool photon = true,
               double t_end = std::numeric_limits<double>::quiet_NaN()) {
    MEOptions o;
    o.dt = dt;
    o.t_end = t_end;
    o.photon = photon;
    o.record_every = decimation(dt);
    return evolve_me(model, o);
}

json invariants_json(const InvariantReport& r) {
    return {{"max_trace_drift", r.max_trace_drift},
            {"max_hermiticity_error", r.max_hermiticity_error},
            {"min_eigenvalue", r.min_eigenvalue}};
}

void say(std::ostream* log, const std::string& msg) {
    if (log) *log << msg << std::endl;
}

}  // namespace

double envelope_distortion(const std::vector<double>& t, const std::vector<double>& flux_in,
                           const std::vector<double>& flux_out) {
    const std::size_t n = t.size();
    if (n < 2 || flux_in.size() != n || flux_out.size() != n) throw InvalidInput("distortion needs matching samples");
    const double h = t[1] - t[0];
    auto unit = [&](const std::vector<double>& f) {
        std::vector<double> g(n);
        double area = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            g[k] = std::max(f[k], 0.0);
            area += g[k] * h;
        }
        if (!(area > 0.0)) throw InvalidInput("flux profile has no weight");
        for (auto& v : g) v /= area;
        return g;
    };
    const auto a = unit(flux_in), b = unit(flux_out);
    double best = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        double ov = 0.0;
        for (std::size_t k = s; k < n; ++k) ov += std::sqrt(b[k] * a[k - s]) * h;
        best = std::max(best, ov);
    }
    return std::max(0.0, 1.0 - best);
}

RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream* log) {
    Artifact art(out_dir);
    art.write("resolved_config.json", canonical_json(cfg));
    const auto points = sweep_points(cfg);
    std::vector<std::string> rows(points.size());
    std::vector<json> summaries(points.size());
    std::vector<char> done(points.size(), 0);
    std::string error;

    const std::size_t outer = points.size() > 1 ? cfg.workers : 1;
    const std::size_t inner = points.size() > 1 ? 1 : cfg.workers;
    try {
        parallel_for(points.size(), outer, [&](std::size_t i) {
            const SweepPoint& pt = points[i];
            const std::string tag = pt.tag();
            say(log, "point " + tag);
            const ChainConfig chain = resolve_chain(cfg, pt);
            const FilterSpec filter = resolve_filter(cfg, pt);
            const SystemModel model = build_chain(chain);

            json s;
            s["tag"] = tag;
            s["shape"] = pt.shape;
            s["n_transmons"] = pt.n_transmons;
            s["p_loss"] = pt.p_loss;
            s["eta"] = pt.eta;
            s["gamma_phi"] = pt.gamma_phi;
            s["filter"] = {{"kind", to_string(filter.kind)}, {"t_i", filter.t_i}, {"t_f", filter.t_f}};
            const double nan = std::numeric_limits<double>::quiet_NaN();
            double e_final = nan;
            SnrResult q;
            q.snr_main = q.snr_sm = q.mean1 = q.var1 = nan;
            EmpiricalSnr mc{nan, nan, nan, nan};
            FidelityResult common{nan, nan, {}}, pair{nan, nan, {}};

            if (cfg.run_me) {
                const MERecord rec = me_run(model, cfg.dt, true, cfg.t_end ? *cfg.t_end : flux_t_end(chain));
                art.write("trajectory_" + tag + ".csv", trajectory_csv(rec));
                e_final = rec.integrated_flux.empty() ? nan : rec.integrated_flux.back();
                s["me"] = {{"integrated_flux", e_final}, {"invariants", invariants_json(rec.invariants)}};
            }
            if (cfg.run_qrt) {
                QrtOptions qo;
                qo.dt = cfg.dt;
                q = snr_deterministic(model, filter, qo);
                s["qrt"] = snr_json(q);
            }
            if (cfg.kernel_step > 0.0) {
                const TwoTimeKernel k = two_time_kernel(model, filter.t_i, filter.t_f, cfg.kernel_step, cfg.dt);
                std::ostringstream os;
                write_kernel_csv(os, k);
                art.write("kernel_" + tag + ".csv", os.str());
                s["kernel"] = {{"second_moment", kernel_second_moment(k, filter)}, {"symmetry_error", k.symmetry_error()}};
            }
            if (cfg.n_traj > 0) {
                const McOutcome r = monte_carlo(model, filter, cfg.n_traj, cfg.seed0, cfg.dt, inner, cfg.pair_target);
                s["monte_carlo"] = json::parse(summary_json(r.summary));
                std::ostringstream hs;
                write_histogram_csv(hs, r.summary.hist);
                art.write("histogram_" + tag + ".csv", hs.str());
                if (cfg.keep_samples) art.write("signals_" + tag + ".csv", signals_csv(r.s0, r.s1));
                mc = r.summary.snr;
                common = r.summary.common;
                pair = r.summary.pair;
            }
            rows[i] = csv_line({tag, pt.shape, std::to_string(pt.n_transmons), to_string(chain.source), fmt(pt.p_loss),
                                fmt(pt.eta), fmt(pt.gamma_phi), to_string(filter.kind), fmt(filter.t_i), fmt(filter.t_f),
                                fmt(e_final), fmt(q.snr_main), fmt(q.snr_sm), fmt(q.mean1), fmt(q.var1), fmt(mc.snr_main),
                                fmt(mc.se_main), fmt(mc.snr_sm), fmt(common.p), fmt(pair.p), fmt(pair.rejection)});
            summaries[i] = std::move(s);
            done[i] = 1;
        });
    } catch (const std::exception& e) {
        error = e.what();
    }

    std::string table =
        "tag,shape,n_transmons,source,p_loss,eta,gamma_phi,filter,t_i,t_f,integrated_flux,snr_qrt_main,snr_qrt_sm,"
        "mean1,var1,snr_mc_main,se_mc_main,snr_mc_sm,p_common,p_pair,rejection_pair\n";
    json all = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!done[i]) continue;
        table += rows[i];
        all.push_back(summaries[i]);
    }
    art.write("results.csv", table);
    art.json_file("summary.json", all);
    return art.finish("run", error, {{"points", points.size()}});
}

RunSummary optimize_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream* log) {
    Artifact art(out_dir);
    art.write("resolved_config.json", canonical_json(cfg));
    std::string error;
    try {
        if (cfg.optimize_free.empty()) throw InvalidInput("optimize.free lists no parameters");
        const SweepPoint pt = sweep_points(cfg).front();
        const ChainConfig chain = resolve_chain(cfg, pt);
        const FilterSpec window = resolve_filter(cfg, pt);
        OptimizerOptions o;
        o.max_sweeps = cfg.optimize_sweeps;
        o.restarts = cfg.optimize_restarts;
        o.seed = cfg.seed0;
        say(log, "optimizing " + pt.tag());
        const ChainOptimization r = optimize_chain(chain, window, cfg.optimize_free, o, std::max(cfg.dt, 1e-2));
        const ChainParameters params = chain_parameters(chain, window, cfg.optimize_free);

        // re-evaluate both ends on the configured grid
        const double before = qrt_snr(chain, window, cfg.dt).snr_main;
        const double after = qrt_snr(r.config, r.window, cfg.dt).snr_main;
        json x = json::object();
        for (std::size_t i = 0; i < params.names.size(); ++i) x[params.names[i]] = r.result.x[i];
        json transmons = json::array();
        for (const auto& t : r.config.transmons) {
            transmons.push_back({{"gamma_c", t.gamma_c}, {"gamma_p", t.gamma_p}, {"delta_c", t.delta_c}, {"delta_p", t.delta_p}});
        }
        art.json_file("optimum.json", {{"parameters", x},
                                       {"snr_start", before},
                                       {"snr_optimum", after},
                                       {"evaluations", r.result.evaluations},
                                       {"window", {{"t_i", r.window.t_i}, {"t_f", r.window.t_f}}},
                                       {"omega_p", r.config.probe_amplitude},
                                       {"transmons", transmons}});
        std::vector<std::string> head{"step", "snr"};
        for (const auto& n : params.names) head.push_back(n);
        std::string trace = csv_line(head);
        for (std::size_t k = 0; k < r.result.trace_value.size(); ++k) {
            std::vector<std::string> row{std::to_string(k), fmt(r.result.trace_value[k])};
            for (double v : r.result.trace_x[k]) row.push_back(fmt(v));
            trace += csv_line(row);
        }
        art.write("trace.csv", trace);
    } catch (const std::exception& e) {
        error = e.what();
    }
    return art.finish("optimize", error);
}

// ---------------------------------------------------------------- figures

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids{"fig2a",       "fig2b",    "fig2c",        "fig2d",      "fig3a",
                                              "fig3b",       "fig3c",    "sm-detuning",  "sm-gamma",   "sm-dephasing",
                                              "sm-filters",  "sm-circloss", "sm-shape-preserving"};
    return ids;
}

namespace {

struct FigureContext {
    const ReproduceOptions& o;
    Artifact& art;
    std::ostream* log;
    json summary = json::object();

    std::string shape(const std::string& fallback) const { return o.shape.empty() ? fallback : o.shape; }
    std::size_t n_max(std::size_t fallback) const { return o.n_max ? o.n_max : fallback; }
};

std::vector<double> or_default(const std::vector<double>& v, std::vector<double> d) { return v.empty() ? d : v; }

void fig2a(FigureContext& c) {
    const std::string shape = c.shape("gaussian");
    const std::size_t nmax = c.n_max(8);
    struct Row {
        SnrResult fock, cav;
        McOutcome mc_fock, mc_cav;
    };
    std::vector<Row> rows(nmax);
    for (std::size_t n = 1; n <= nmax; ++n) {
        say(c.log, "fig2a N=" + std::to_string(n));
        const FilterSpec w = figure_window(shape, n);
        const SystemModel fock = build_chain(figure_chain(shape, n, SourceKind::fock));
        const SystemModel cav = build_chain(figure_chain(shape, n));
        QrtOptions q;
        q.dt = c.o.dt;
        rows[n - 1].fock = snr_deterministic(fock, w, q);
        rows[n - 1].cav = snr_deterministic(cav, w, q);
        if (c.o.n_traj > 0) {
            rows[n - 1].mc_fock = monte_carlo(fock, w, c.o.n_traj, c.o.seed0, c.o.dt, c.o.workers, 0.95);
            rows[n - 1].mc_cav = monte_carlo(cav, w, c.o.n_traj, c.o.seed0, c.o.dt, c.o.workers, 0.95);
        }
    }
    std::string t =
        "n_transmons,snr_me_fock,snr_me_cavity,snr_sme_fock,se_sme_fock,snr_sme_cavity,se_sme_cavity,"
        "fidelity_common,fidelity_inferred\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t n = 1; n <= nmax; ++n) {
        const Row& r = rows[n - 1];
        const bool mc = c.o.n_traj > 0;
        t += csv_line({std::to_string(n), fmt(r.fock.snr_main), fmt(r.cav.snr_main),
                       fmt(mc ? r.mc_fock.summary.snr.snr_main : nan), fmt(mc ? r.mc_fock.summary.snr.se_main : nan),
                       fmt(mc ? r.mc_cav.summary.snr.snr_main : nan), fmt(mc ? r.mc_cav.summary.snr.se_main : nan),
                       fmt(mc ? r.mc_cav.summary.common.p : nan), fmt(gaussian_inferred_fidelity(r.cav.snr_main))});
    }
    c.art.write("snr.csv", t);
    c.summary["shape"] = shape;
}

void fig2b(FigureContext& c) {
    const std::string shape = c.shape("gaussian");
    const std::size_t n_traj = c.o.n_traj ? c.o.n_traj : 2000;
    for (std::size_t n : {std::size_t{1}, std::size_t{8}}) {
        say(c.log, "fig2b N=" + std::to_string(n));
        const FilterSpec w = figure_window(shape, n);
        const SystemModel model = build_chain(figure_chain(shape, n));
        const McOutcome r = monte_carlo(model, w, n_traj, c.o.seed0, c.o.dt, c.o.workers, 0.95);
        std::ostringstream hs;
        write_histogram_csv(hs, r.summary.hist);
        const std::string tag = "N" + std::to_string(n);
        c.art.write("histogram_" + tag + ".csv", hs.str());
        c.art.write("signals_" + tag + ".csv", signals_csv(r.s0, r.s1));
        QrtOptions q;
        q.dt = c.o.dt;
        json s = json::parse(summary_json(r.summary));
        s["snr_qrt"] = snr_deterministic(model, w, q).snr_main;
        c.summary[tag] = s;
    }
}

void fig2c(FigureContext& c) {
    const std::string shape = c.shape("gaussian");
    const std::size_t n = c.n_max(3);
    const ChainConfig chain = figure_chain(shape, n);
    const SystemModel model = build_chain(chain);
    const MERecord rec = me_run(model, c.o.dt);
    std::vector<std::string> head{"t", "mean_j"};
    for (std::size_t k = 1; k <= n; ++k) head.push_back("p_exc_" + std::to_string(k));
    head.push_back("input_flux");
    std::string t = csv_line(head);
    std::vector<double> peaks(n, 0.0);
    for (std::size_t i = 0; i < rec.t.size(); ++i) {
        std::vector<std::string> row{fmt(rec.t[i]), fmt(std::sqrt(chain.eta) * rec.y[i])};
        for (std::size_t k = 0; k < n; ++k) {
            row.push_back(fmt(rec.p_exc[k][i]));
            if (rec.p_exc[k][i] > rec.p_exc[k][static_cast<std::size_t>(peaks[k])]) peaks[k] = static_cast<double>(i);
        }
        row.push_back(fmt(chain.pulse.flux(rec.t[i])));
        t += csv_line(row);
    }
    c.art.write("dynamics.csv", t);
    json pk = json::array();
    for (std::size_t k = 0; k < n; ++k) pk.push_back(rec.t[static_cast<std::size_t>(peaks[k])]);
    c.summary["peak_times"] = pk;

    // one conditioned record for illustration
    SMEOptions so;
    so.dt = c.o.dt;
    so.t_end = chain.pulse.t_end();
    so.keep_samples = true;
    so.keep_conditioned_y = true;
    const HomodyneRecord hr = simulate_trajectory(model, true, c.o.seed0, so);
    std::string tr = "t,j,conditioned_y\n";
    const std::size_t every = decimation(c.o.dt);
    for (std::size_t k = 0; k < hr.j.size(); k += every) {
        tr += csv_line({fmt(static_cast<double>(k) * hr.dt), fmt(hr.j[k]),
                        fmt(k < hr.conditioned_y.size() ? hr.conditioned_y[k] : std::numeric_limits<double>::quiet_NaN())});
    }
    c.art.write("trajectory_example.csv", tr);
}

void fig2d(FigureContext& c) {
    const std::string shape = c.shape("gaussian");
    const std::vector<std::size_t> ns{1, 4, 8};
    std::vector<MERecord> recs(ns.size());
    parallel_for(ns.size(), c.o.workers, [&](std::size_t i) {
        const ChainConfig ch = figure_chain(shape, ns[i], SourceKind::fock);
        recs[i] = me_run(build_chain(ch), c.o.dt, true, flux_t_end(ch));
    });
    std::size_t len = 0;
    for (const auto& r : recs) len = std::max(len, r.t.size());
    std::string t = "t,E_N1,E_N4,E_N8\n";
    for (std::size_t i = 0; i < len; ++i) {
        std::vector<std::string> row;
        double tt = 0.0;
        for (const auto& r : recs) {
            const std::size_t j = std::min(i, r.t.size() - 1);
            tt = std::max(tt, r.t[j]);
        }
        row.push_back(fmt(tt));
        for (const auto& r : recs) row.push_back(fmt(r.integrated_flux[std::min(i, r.t.size() - 1)]));
        t += csv_line(row);
    }
    c.art.write("integrated_flux.csv", t);
    for (std::size_t i = 0; i < ns.size(); ++i) {
        c.summary["N" + std::to_string(ns[i])] = {{"integrated_flux", recs[i].integrated_flux.back()},
                                                  {"invariants", invariants_json(recs[i].invariants)}};
    }
}

// SNR(N) for one chain family, N = 1..nmax, in parallel.
std::vector<SnrResult> snr_curve(const std::string& shape, std::size_t nmax, double dt, std::size_t workers,
                                 const std::function<ChainConfig(std::size_t)>& chain_for) {
    std::vector<SnrResult> out(nmax);
    parallel_for(nmax, workers, [&](std::size_t i) { out[i] = qrt_snr(chain_for(i + 1), figure_window(shape, i + 1), dt); });
    return out;
}

void fig3a(FigureContext& c) {
    const std::size_t nmax = c.n_max(8);
    std::string t = "n_transmons";
    std::map<std::string, std::vector<SnrResult>> curves;
    for (const auto& p : shape_presets()) {
        say(c.log, "fig3a " + p.name);
        curves[p.name] = snr_curve(p.name, nmax, c.o.dt, c.o.workers, [&](std::size_t n) { return figure_chain(p.name, n); });
        t += ",snr_" + p.name;
    }
    t += "\n";
    for (std::size_t n = 1; n <= nmax; ++n) {
        std::vector<std::string> row{std::to_string(n)};
        for (const auto& p : shape_presets()) row.push_back(fmt(curves[p.name][n - 1].snr_main));
        t += csv_line(row);
    }
    c.art.write("snr.csv", t);
    for (const auto& p : shape_presets()) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t n = 1; n <= nmax; ++n) pts.emplace_back(static_cast<double>(n), curves[p.name][n - 1].snr_main);
        c.summary[p.name] = {{"chi_fit", fit_sqrtN(pts)}, {"chi_table", p.chi}};
    }
}

// Long-format SNR(N) table over one chain parameter.
void snr_family(FigureContext& c, const std::string& column, const std::vector<double>& values, std::size_t nmax,
                const std::string& shape, const std::function<ChainConfig(double, std::size_t)>& chain_for) {
    std::string t = column + ",n_transmons,snr_main,snr_sm\n";
    for (double v : values) {
        say(c.log, column + " = " + fmt(v));
        const auto curve = snr_curve(shape, nmax, c.o.dt, c.o.workers, [&](std::size_t n) { return chain_for(v, n); });
        std::size_t best = 0;
        for (std::size_t n = 1; n <= nmax; ++n) {
            t += csv_line({fmt(v), std::to_string(n), fmt(curve[n - 1].snr_main), fmt(curve[n - 1].snr_sm)});
            if (curve[n - 1].snr_main > curve[best].snr_main) best = n - 1;
        }
        c.summary[column + "=" + fmt(v)] = {{"argmax_n", best + 1}, {"max_snr", curve[best].snr_main}};
    }
    c.art.write("snr.csv", t);
}

void fig3b(FigureContext& c, std::vector<double> default_losses, std::size_t default_nmax) {
    const std::string shape = c.shape("gaussian");
    snr_family(c, "p_loss", or_default(c.o.p_loss, std::move(default_losses)), c.n_max(default_nmax), shape,
               [&](double v, std::size_t n) { return figure_chain(shape, n, SourceKind::cavity, v); });
}

void fig3c(FigureContext& c) {
    const std::string shape = c.shape("gaussian");
    const auto etas = or_default(c.o.eta, {0.4, 0.6, 0.8, 1.0});
    const std::size_t nmax = c.n_max(16);
    std::vector<std::size_t> need(etas.size(), 0);
    std::vector<std::vector<double>> snrs(etas.size());
    parallel_for(etas.size(), c.o.workers, [&](std::size_t i) {
        for (std::size_t n = 1; n <= nmax; ++n) {
            const double s = qrt_snr(figure_chain(shape, n, SourceKind::cavity, 0.0, etas[i]), figure_window(shape, n), c.o.dt).snr_main;
            snrs[i].push_back(s);
            if (s >= 1.0) {
                need[i] = n;
                break;
            }
        }
    });
    std::string t = "eta,n_required,snr_at_n_required\n";
    std::string curve = "eta,n_transmons,snr_main\n";
    for (std::size_t i = 0; i < etas.size(); ++i) {
        t += csv_line({fmt(etas[i]), need[i] ? std::to_string(need[i]) : std::string("none"),
                       need[i] ? fmt(snrs[i].back()) : std::string("nan")});
        for (std::size_t n = 0; n < snrs[i].size(); ++n) curve += csv_line({fmt(etas[i]), std::to_string(n + 1), fmt(snrs[i][n])});
    }
    c.art.write("n_required.csv", t);
    c.art.write("snr.csv", curve);
    c.summary["n_max"] = nmax;
}

void sm_detuning(FigureContext& c) {
    const std::string shape = c.shape("gaussian");
    const std::size_t n = c.n_max(4);
    std::vector<double> grid;
    for (int k = -10; k <= 10; ++k) grid.push_back(k / 10.0);
    std::vector<double> sc(grid.size()), sp(grid.size());
    parallel_for(2 * grid.size(), c.o.workers, [&](std::size_t i) {
        ChainConfig ch = figure_chain(shape, n);
        const double d = grid[i % grid.size()];
        for (auto& t : ch.transmons) (i < grid.size() ? t.delta_c : t.delta_p) = d;
        (i < grid.size() ? sc : sp)[i % grid.size()] = qrt_snr(ch, figure_window(shape, n), c.o.dt).snr_main;
    });
    std::string t = "detuning,snr_delta_c,snr_delta_p\n";
    for (std::size_t i = 0; i < grid.size(); ++i) t += csv_line({fmt(grid[i]), fmt(sc[i]), fmt(sp[i])});
    c.art.write("snr.csv", t);
    c.summary["n_transmons"] = n;
}

void sm_gamma(FigureContext& c) {
    const std::string shape = c.shape("gaussian");
    const std::size_t n = c.n_max(4);
    std::vector<double> scale;
    for (int k = 5; k <= 15; ++k) scale.push_back(k / 10.0);
    std::vector<double> ratio{1.0, 1.5, 2.0, 2.5, 3.0, 4.0};
    std::vector<double> s1(scale.size()), s2(ratio.size());
    parallel_for(scale.size() + ratio.size(), c.o.workers, [&](std::size_t i) {
        ChainConfig ch = figure_chain(shape, n);
        if (i < scale.size()) {
            for (std::size_t k = 1; k < ch.transmons.size(); ++k) {
                ch.transmons[k].gamma_c *= scale[i];
                ch.transmons[k].gamma_p = 2.0 * ch.transmons[k].gamma_c;
            }
            s1[i] = qrt_snr(ch, figure_window(shape, n), c.o.dt).snr_main;
        } else {
            const double r = ratio[i - scale.size()];
            for (auto& t : ch.transmons) t.gamma_p = r * t.gamma_c;
            s2[i - scale.size()] = qrt_snr(ch, figure_window(shape, n), c.o.dt).snr_main;
        }
    });
    std::string t = "gamma_c_scale,snr_main\n";
    for (std::size_t i = 0; i < scale.size(); ++i) t += csv_line({fmt(scale[i]), fmt(s1[i])});
    c.art.write("snr_gamma_c.csv", t);
    std::string u = "gamma_p_ratio,snr_main\n";
    for (std::size_t i = 0; i < ratio.size(); ++i) u += csv_line({fmt(ratio[i]), fmt(s2[i])});
    c.art.write("snr_gamma_p.csv", u);
    c.summary["n_transmons"] = n;
}

void sm_dephasing(FigureContext& c) {
    const std::string shape = c.shape("gaussian");
    snr_family(c, "gamma_phi", or_default(c.o.gamma_phi, {0.0, 0.05, 0.1, 0.2}), c.n_max(8), shape,
               [&](double v, std::size_t n) { return figure_chain(shape, n, SourceKind::cavity, 0.0, 1.0, v); });
}

void sm_filters(FigureContext& c) {
    const std::string shape = c.shape("rising_exp");
    const std::size_t nmax = c.n_max(8);
    std::vector<SnrResult> box(nmax), matched(nmax);
    parallel_for(2 * nmax, c.o.workers, [&](std::size_t i) {
        const std::size_t n = i % nmax + 1;
        const ChainConfig ch = figure_chain(shape, n);
        if (i < nmax) {
            box[n - 1] = qrt_snr(ch, figure_window(shape, n), c.o.dt);
        } else {
            matched[n - 1] = qrt_snr(ch, FilterSpec::matched(0.0, ch.pulse.t_end()), c.o.dt);
        }
    });
    std::string t = "n_transmons,snr_boxcar,snr_matched\n";
    for (std::size_t n = 1; n <= nmax; ++n) t += csv_line({std::to_string(n), fmt(box[n - 1].snr_main), fmt(matched[n - 1].snr_main)});
    c.art.write("snr.csv", t);
    c.summary["shape"] = shape;
}

struct ShapeScore {
    double snr, distortion;
};

ShapeScore shape_score(const ChainConfig& ch, const FilterSpec& w, double dt) {
    const SystemModel model = build_chain(ch);
    QrtOptions q;
    q.dt = dt;
    const double snr = snr_deterministic(model, w, q).snr_main;
    const MERecord rec = me_run(model, dt);
    std::vector<double> fin(rec.t.size());
    for (std::size_t i = 0; i < rec.t.size(); ++i) fin[i] = ch.pulse.flux(rec.t[i]);
    return {snr, envelope_distortion(rec.t, fin, rec.flux)};
}

void sm_shape_preserving(FigureContext& c) {
    const std::string shape = c.shape("gaussian");
    const std::size_t n = c.n_max(4);
    const double weight = 2.0;  // SNR units per unit distortion
    const double dt_opt = std::max(c.o.dt, 1e-2);
    const ChainConfig base = figure_chain(shape, n);
    const FilterSpec w = figure_window(shape, n);
    const ChainParameters params = chain_parameters(base, w, {"gamma_c", "omega_p"});
    auto objective = [&](const std::vector<double>& x) {
        ChainConfig ch = base;
        FilterSpec ww = w;
        apply_parameters(params, x, ch, ww);
        const ShapeScore s = shape_score(ch, ww, dt_opt);
        return s.snr - weight * s.distortion;
    };
    OptimizerOptions oo;
    oo.restarts = 1;
    oo.max_sweeps = 20;
    oo.seed = c.o.seed0;
    const OptimizerResult r = maximize(objective, params.start, params.bounds, oo);
    ChainConfig best = base;
    FilterSpec bw = w;
    apply_parameters(params, r.x, best, bw);

    const ShapeScore s0 = shape_score(base, w, c.o.dt);
    const ShapeScore s1 = shape_score(best, bw, c.o.dt);
    std::string t = "parameters,snr_main,distortion\n";
    t += csv_line({"table", fmt(s0.snr), fmt(s0.distortion)});
    t += csv_line({"shape_preserving", fmt(s1.snr), fmt(s1.distortion)});
    c.art.write("comparison.csv", t);
    json x = json::object();
    for (std::size_t i = 0; i < params.names.size(); ++i) x[params.names[i]] = r.x[i];
    c.summary["optimized_parameters"] = x;
    c.summary["objective"] = "snr - " + fmt(weight) + " * distortion";
    c.summary["authoritative"] = false;
    c.summary["n_transmons"] = n;
}

}  // namespace

RunSummary reproduce(const std::string& id, const ReproduceOptions& o, const std::string& out_dir, std::ostream* log) {
    const auto& ids = figure_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        std::string known;
        for (const auto& s : ids) known += (known.empty() ? "" : ", ") + s;
        throw InvalidInput("unknown figure id '" + id + "' (known: " + known + ")");
    }
    if (!o.shape.empty()) shape_preset(o.shape);  // validates
    Artifact art(out_dir);
    FigureContext c{o, art, log};
    std::string error;
    try {
        if (id == "fig2a") fig2a(c);
        else if (id == "fig2b") fig2b(c);
        else if (id == "fig2c") fig2c(c);
        else if (id == "fig2d") fig2d(c);
        else if (id == "fig3a") fig3a(c);
        else if (id == "fig3b") fig3b(c, {0.04, 0.08}, 10);
        else if (id == "fig3c") fig3c(c);
        else if (id == "sm-detuning") sm_detuning(c);
        else if (id == "sm-gamma") sm_gamma(c);
        else if (id == "sm-dephasing") sm_dephasing(c);
        else if (id == "sm-filters") sm_filters(c);
        else if (id == "sm-circloss") fig3b(c, {0.0, 0.01, 0.02, 0.04, 0.08}, 12);
        else sm_shape_preserving(c);
    } catch (const std::exception& e) {
        error = e.what();
    }
    art.json_file("summary.json", c.summary);
    json opts = {{"figure", id},       {"n_traj", o.n_traj},   {"seed", o.seed0},       {"dt", o.dt},
                 {"p_loss", o.p_loss}, {"eta", o.eta},         {"gamma_phi", o.gamma_phi}, {"shape", o.shape},
                 {"n_max", o.n_max}};
    art.json_file("resolved_config.json", opts);
    return art.finish("reproduce " + id, error, {{"options", opts}});
}

}  // namespace qnd
