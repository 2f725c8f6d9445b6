// qnd-photon: command-line front end for the cascaded-transmon photon detector.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qnd/config.hpp"
#include "qnd/detection.hpp"
#include "qnd/io.hpp"
#include "qnd/qrt.hpp"
#include "qnd/runner.hpp"
#include "qnd/sme_engine.hpp"

namespace {

using nlohmann::json;

// Flags shared by several subcommands; unset values leave defaults alone.
struct Common {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> traj;
    std::optional<double> dt;
    std::string out;
    std::optional<std::size_t> workers;
    std::vector<double> ploss, eta, dephasing;
    std::vector<std::string> shape;
};

void add_common(CLI::App* app, Common& c, bool lists = true) {
    app->add_option("--seed", c.seed, "first trajectory seed");
    app->add_option("--traj", c.traj, "trajectories per photon class");
    app->add_option("--dt", c.dt, "time step")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output directory (default: $QND_OUTPUT_ROOT/<command>)");
    app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    if (lists) {
        app->add_option("--ploss", c.ploss, "circulator power loss (one or more)")->check(CLI::Range(0.0, 1.0));
        app->add_option("--eta", c.eta, "homodyne efficiency (one or more)")->check(CLI::Range(0.0, 1.0));
        app->add_option("--dephasing", c.dephasing, "pure dephasing rate (one or more)")->check(CLI::NonNegativeNumber);
        app->add_option("--shape", c.shape, "pulse shape: gaussian, decaying_exp, rising_exp");
    }
}

std::string out_dir(const Common& c, const std::string& name) {
    return c.out.empty() ? (std::filesystem::path(qnd::default_output_root()) / name).string() : c.out;
}

// A single value sets the scalar, several values become a sweep axis.
template <class T>
void scalar_or_axis(const std::vector<T>& v, T& scalar, std::vector<T>& axis) {
    if (v.size() == 1) {
        scalar = v[0];
        axis.clear();
    } else if (v.size() > 1) {
        axis = v;
    }
}

void apply_common(const Common& c, qnd::ExperimentConfig& cfg) {
    if (c.seed) cfg.seed0 = *c.seed;
    if (c.traj) cfg.n_traj = *c.traj;
    if (c.dt) cfg.dt = *c.dt;
    if (c.workers) cfg.workers = *c.workers;
    scalar_or_axis(c.ploss, cfg.p_loss, cfg.sweep.p_loss);
    scalar_or_axis(c.eta, cfg.eta, cfg.sweep.eta);
    scalar_or_axis(c.dephasing, cfg.gamma_phi, cfg.sweep.gamma_phi);
    scalar_or_axis(c.shape, cfg.shape, cfg.sweep.shape);
}

int report(const qnd::RunSummary& s) {
    std::cout << s.dir << "\n";
    if (!s.complete) {
        std::cerr << "error: run incomplete: " << s.error << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cascaded-transmon single-photon detector: deterministic SNR, trajectories, figure data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qnd::code_version());
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "no progress messages");

    // run
    Common run_c;
    std::string run_cfg;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", run_cfg, "JSON config file")->required();
    add_common(run, run_c);

    // reproduce
    Common rep_c;
    std::string figure;
    std::size_t n_max = 0;
    auto* rep = app.add_subcommand("reproduce", "regenerate the data behind one figure");
    rep->add_option("figure_id", figure, "figure id")->required()->check(CLI::IsMember(qnd::figure_ids()));
    rep->add_option("--nmax", n_max, "largest chain length (figure default when 0)");
    add_common(rep, rep_c);

    // optimize
    Common opt_c;
    std::string opt_cfg;
    auto* opt = app.add_subcommand("optimize", "maximise the SNR over the config's free parameters");
    opt->add_option("config", opt_cfg, "JSON config file")->required();
    add_common(opt, opt_c, false);

    // snr
    Common snr_c;
    std::size_t snr_n = 1;
    std::string snr_source = "cavity", snr_filter = "boxcar";
    std::optional<double> snr_ti, snr_tf;
    auto* snr = app.add_subcommand("snr", "deterministic SNR of one chain");
    snr->add_option("-n,--transmons", snr_n, "chain length")->check(CLI::PositiveNumber);
    snr->add_option("--source", snr_source, "cavity or fock")->check(CLI::IsMember({"cavity", "fock"}));
    snr->add_option("--filter", snr_filter, "boxcar or matched")->check(CLI::IsMember({"boxcar", "matched"}));
    snr->add_option("--t-i", snr_ti, "window start");
    snr->add_option("--t-f", snr_tf, "window end");
    add_common(snr, snr_c);

    // fidelity
    Common fid_c;
    std::size_t fid_n = 8;
    std::string fid_signals;
    double fid_target = 0.95;
    auto* fid = app.add_subcommand("fidelity", "photon-number inference from filtered signals");
    fid->add_option("-n,--transmons", fid_n, "chain length")->check(CLI::PositiveNumber);
    fid->add_option("--signals", fid_signals, "CSV with columns photons,signal (skips simulation)")->check(CLI::ExistingFile);
    fid->add_option("--target", fid_target, "fidelity target for the inconclusive band")->check(CLI::Range(0.5, 1.0));
    add_common(fid, fid_c);

    CLI11_PARSE(app, argc, argv);
    std::ostream* log = quiet ? nullptr : &std::cerr;

    try {
        if (*run) {
            qnd::ExperimentConfig cfg = qnd::load_config(run_cfg);
            apply_common(run_c, cfg);
            std::string dir = run_c.out.empty() ? cfg.output_dir : run_c.out;
            if (dir.empty()) dir = out_dir(run_c, "run-" + std::filesystem::path(run_cfg).stem().string());
            return report(qnd::run_experiment(cfg, dir, log));
        }
        if (*rep) {
            qnd::ReproduceOptions o;
            if (rep_c.traj) o.n_traj = *rep_c.traj;
            if (rep_c.seed) o.seed0 = *rep_c.seed;
            if (rep_c.dt) o.dt = *rep_c.dt;
            if (rep_c.workers) o.workers = *rep_c.workers;
            o.p_loss = rep_c.ploss;
            o.eta = rep_c.eta;
            o.gamma_phi = rep_c.dephasing;
            if (rep_c.shape.size() > 1) throw qnd::InvalidInput("reproduce takes a single --shape");
            if (!rep_c.shape.empty()) o.shape = rep_c.shape[0];
            o.n_max = n_max;
            return report(qnd::reproduce(figure, o, out_dir(rep_c, figure), log));
        }
        if (*opt) {
            qnd::ExperimentConfig cfg = qnd::load_config(opt_cfg);
            apply_common(opt_c, cfg);
            std::string dir = opt_c.out.empty() ? cfg.output_dir : opt_c.out;
            if (dir.empty()) dir = out_dir(opt_c, "optimize-" + std::filesystem::path(opt_cfg).stem().string());
            return report(qnd::optimize_experiment(cfg, dir, log));
        }

        // snr and fidelity share a single-chain config
        qnd::ExperimentConfig cfg;
        const Common& c = *snr ? snr_c : fid_c;
        apply_common(c, cfg);
        if (!cfg.sweep.p_loss.empty() || !cfg.sweep.eta.empty() || !cfg.sweep.gamma_phi.empty() || !cfg.sweep.shape.empty()) {
            throw qnd::InvalidInput("snr and fidelity take single values; use 'run' with a sweep config for axes");
        }
        if (*snr) {
            cfg.n_transmons = snr_n;
            cfg.source = qnd::source_kind_from_string(snr_source);
            cfg.filter_kind = snr_filter;
            cfg.t_i = snr_ti;
            cfg.t_f = snr_tf;
            const qnd::SweepPoint pt = qnd::sweep_points(cfg).front();
            const qnd::FilterSpec w = qnd::resolve_filter(cfg, pt);
            qnd::QrtOptions q;
            q.dt = cfg.dt;
            const qnd::SnrResult r = qnd::snr_deterministic(qnd::build_chain(qnd::resolve_chain(cfg, pt)), w, q);
            json j = {{"shape", pt.shape},  {"n_transmons", pt.n_transmons}, {"source", snr_source},
                      {"p_loss", pt.p_loss}, {"eta", pt.eta},                 {"gamma_phi", pt.gamma_phi},
                      {"filter", {{"kind", snr_filter}, {"t_i", w.t_i}, {"t_f", w.t_f}}},
                      {"mean1", r.mean1},   {"var1", r.var1},                 {"mean0", r.mean0},
                      {"var0", r.var0},     {"t_m", r.filter_energy},         {"snr_main", r.snr_main},
                      {"snr_sm", r.snr_sm}};
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        // fidelity
        std::vector<double> s0, s1;
        double t_m = 0.0;
        if (!fid_signals.empty()) {
            std::vector<double> ph, sig;
            qnd::read_two_column(fid_signals, ph, sig);
            for (std::size_t i = 0; i < ph.size(); ++i) (ph[i] > 0.5 ? s1 : s0).push_back(sig[i]);
            cfg.n_transmons = fid_n;
            const qnd::FilterSpec w = qnd::resolve_filter(cfg, qnd::sweep_points(cfg).front());
            t_m = w.t_m();
        } else {
            cfg.n_transmons = fid_n;
            if (!fid_c.traj) cfg.n_traj = 2000;
            const qnd::SweepPoint pt = qnd::sweep_points(cfg).front();
            const qnd::SystemModel model = qnd::build_chain(qnd::resolve_chain(cfg, pt));
            const qnd::FilterSpec w = qnd::resolve_filter(cfg, pt);
            qnd::SMEOptions so;
            so.dt = cfg.dt;
            so.filters = {w};
            if (log) *log << "simulating " << cfg.n_traj << " + " << cfg.n_traj << " trajectories (" << pt.tag() << ")\n";
            s1 = qnd::batch_signals(qnd::run_batch(model, true, cfg.n_traj, cfg.seed0, so, cfg.workers), 0);
            s0 = qnd::batch_signals(qnd::run_batch(model, false, cfg.n_traj, cfg.seed0, so, cfg.workers), 0);
            t_m = w.t_m();
        }
        if (s0.size() < 2 || s1.size() < 2) throw qnd::InvalidInput("need at least two signals per photon class");
        const qnd::DetectionSummary sum = qnd::summarize(s0, s1, t_m, fid_target);
        if (!fid_c.out.empty()) {
            std::filesystem::create_directories(fid_c.out);
            std::ofstream h(std::filesystem::path(fid_c.out) / "histogram.csv", std::ios::binary);
            qnd::write_histogram_csv(h, sum.hist);
            std::ofstream js(std::filesystem::path(fid_c.out) / "summary.json", std::ios::binary);
            js << qnd::summary_json(sum) << "\n";
        }
        std::cout << qnd::summary_json(sum) << "\n";
        return 0;
    } catch (const qnd::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
