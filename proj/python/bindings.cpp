#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/numpy.h>

#include <cmath>
#include <optional>

#include "qnd/config.hpp"
#include "qnd/detection.hpp"
#include "qnd/me_engine.hpp"
#include "qnd/presets.hpp"
#include "qnd/qrt.hpp"
#include "qnd/runner.hpp"
#include "qnd/sme_engine.hpp"

namespace py = pybind11;
using namespace qnd;

namespace {

py::array_t<double> arr(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

ChainConfig make_chain(const std::string& shape, std::size_t n, const std::string& source, double p_loss, double eta,
                       double gamma_phi, bool full) {
    ChainOverrides o;
    o.source = source_kind_from_string(source);
    o.p_loss = p_loss;
    o.eta = eta;
    o.gamma_phi = gamma_phi;
    o.representation = full ? Representation::full : Representation::reduced;
    return preset_chain(shape_preset(shape), n, o);
}

// Window: the shape's tabulated window unless t_i / t_f are given.
FilterSpec make_filter(const std::string& shape, std::size_t n, const std::string& kind, std::optional<double> t_i,
                       std::optional<double> t_f) {
    const FilterSpec w = preset_window(shape_preset(shape), n);
    const double a = t_i.value_or(w.t_i), b = t_f.value_or(w.t_f);
    if (kind == "boxcar") return FilterSpec::boxcar(a, b);
    if (kind == "matched") return FilterSpec::matched(a, b);
    throw InvalidInput("filter must be 'boxcar' or 'matched'");
}

py::dict fidelity_dict(const FidelityResult& r) {
    py::dict d;
    d["p"] = r.p;
    d["rejection"] = r.rejection;
    d["s0_threshold"] = r.thresholds.s0_t;
    d["s1_threshold"] = r.thresholds.s1_t;
    return d;
}

py::dict summary_dict(const RunSummary& r) {
    py::dict d;
    d["dir"] = r.dir;
    d["complete"] = r.complete;
    d["error"] = r.error;
    d["files"] = r.files;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "QND single-photon detection with cascaded transmons";
    m.attr("__version__") = code_version();

    py::register_exception<IntegrationFailure>(m, "IntegrationFailure", PyExc_RuntimeError);
    // ConfigError derives from InvalidInput, so it must be registered after it
    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("shapes", [] {
        std::vector<std::string> out;
        for (const auto& p : shape_presets()) out.push_back(p.name);
        return out;
    });

    m.def("chain_parameters",
          [](const std::string& shape, std::size_t n) {
              const ChainConfig c = make_chain(shape, n, "cavity", 0.0, 1.0, 0.0, false);
              py::dict d;
              std::vector<double> gc, gp;
              for (const auto& t : c.transmons) {
                  gc.push_back(t.gamma_c);
                  gp.push_back(t.gamma_p);
              }
              const FilterSpec w = preset_window(shape_preset(shape), n);
              d["gamma_c"] = gc;
              d["gamma_p"] = gp;
              d["omega_p"] = c.probe_amplitude;
              d["t_i"] = w.t_i;
              d["t_f"] = w.t_f;
              d["t_end"] = c.pulse.t_end();
              return d;
          },
          py::arg("shape") = "gaussian", py::arg("n") = 1);

    m.def("snr",
          [](const std::string& shape, std::size_t n, const std::string& source, double p_loss, double eta, double gamma_phi,
             const std::string& filter, std::optional<double> t_i, std::optional<double> t_f, double dt) {
              const SystemModel model = build_chain(make_chain(shape, n, source, p_loss, eta, gamma_phi, false));
              QrtOptions q;
              q.dt = dt;
              SnrResult r;
              {
                  py::gil_scoped_release release;
                  r = snr_deterministic(model, make_filter(shape, n, filter, t_i, t_f), q);
              }
              py::dict d;
              d["snr"] = r.snr_main;
              d["snr_sm"] = r.snr_sm;
              d["mean1"] = r.mean1;
              d["var1"] = r.var1;
              d["mean0"] = r.mean0;
              d["var0"] = r.var0;
              return d;
          },
          py::arg("shape") = "gaussian", py::arg("n") = 1, py::arg("source") = "cavity", py::arg("p_loss") = 0.0,
          py::arg("eta") = 1.0, py::arg("gamma_phi") = 0.0, py::arg("filter") = "boxcar", py::arg("t_i") = py::none(),
          py::arg("t_f") = py::none(), py::arg("dt") = 1e-3);

    m.def("master_equation",
          [](const std::string& shape, std::size_t n, const std::string& source, double p_loss, double gamma_phi,
             bool photon, double dt, std::optional<double> t_end, bool full) {
              const SystemModel model = build_chain(make_chain(shape, n, source, p_loss, 1.0, gamma_phi, full));
              MEOptions o;
              o.dt = dt;
              o.photon = photon;
              if (t_end) o.t_end = *t_end;
              MERecord r;
              {
                  py::gil_scoped_release release;
                  r = evolve_me(model, o);
              }
              py::dict d;
              d["t"] = arr(r.t);
              d["y"] = arr(r.y);
              py::list p;
              for (const auto& v : r.p_exc) p.append(arr(v));
              d["p_exc"] = p;
              d["trace"] = arr(r.trace);
              d["flux"] = arr(r.flux);
              d["integrated_flux"] = arr(r.integrated_flux);
              d["max_trace_drift"] = r.invariants.max_trace_drift;
              d["min_eigenvalue"] = r.invariants.min_eigenvalue;
              return d;
          },
          py::arg("shape") = "gaussian", py::arg("n") = 1, py::arg("source") = "cavity", py::arg("p_loss") = 0.0,
          py::arg("gamma_phi") = 0.0, py::arg("photon") = true, py::arg("dt") = 1e-3, py::arg("t_end") = py::none(),
          py::arg("full") = false);

    m.def("monte_carlo",
          [](const std::string& shape, std::size_t n, std::size_t n_traj, bool photon, std::uint64_t seed,
             const std::string& source, double p_loss, double eta, double gamma_phi, std::optional<double> t_i,
             std::optional<double> t_f, double dt, std::size_t workers) {
              const SystemModel model = build_chain(make_chain(shape, n, source, p_loss, eta, gamma_phi, false));
              SMEOptions o;
              o.dt = dt;
              o.filters = {make_filter(shape, n, "boxcar", t_i, t_f)};
              std::vector<double> s;
              {
                  py::gil_scoped_release release;
                  s = batch_signals(run_batch(model, photon, n_traj, seed, o, workers), 0);
              }
              return arr(s);
          },
          py::arg("shape") = "gaussian", py::arg("n") = 1, py::arg("n_traj") = 100, py::arg("photon") = true,
          py::arg("seed") = 1, py::arg("source") = "cavity", py::arg("p_loss") = 0.0, py::arg("eta") = 1.0,
          py::arg("gamma_phi") = 0.0, py::arg("t_i") = py::none(), py::arg("t_f") = py::none(), py::arg("dt") = 1e-3,
          py::arg("workers") = 1);

    m.def("empirical_snr",
          [](const std::vector<double>& s0, const std::vector<double>& s1, double t_m) {
              const EmpiricalSnr e = snr_empirical(s0, s1, t_m);
              py::dict d;
              d["snr"] = e.snr_main;
              d["se"] = e.se_main;
              d["snr_sm"] = e.snr_sm;
              d["se_sm"] = e.se_sm;
              return d;
          },
          py::arg("s0"), py::arg("s1"), py::arg("t_m"));

    m.def("fidelity",
          [](const std::vector<double>& s0, const std::vector<double>& s1, std::optional<double> target) {
              return fidelity_dict(target ? threshold_pair_for_target(s0, s1, *target) : best_common_threshold(s0, s1));
          },
          py::arg("s0"), py::arg("s1"), py::arg("target") = py::none());

    m.def("inferred_fidelity", [](double snr) { return gaussian_inferred_fidelity(snr); }, py::arg("snr"));

    m.def("fit_sqrt_n",
          [](const std::vector<double>& n, const std::vector<double>& snr) {
              if (n.size() != snr.size()) throw InvalidInput("n and snr differ in length");
              std::vector<std::pair<double, double>> pts;
              for (std::size_t i = 0; i < n.size(); ++i) pts.emplace_back(n[i], snr[i]);
              return fit_sqrtN(pts);
          },
          py::arg("n"), py::arg("snr"));

    m.def("canonical_config", [](const std::string& text) { return canonical_json(parse_config(text, "<python>")); },
          py::arg("text"));

    m.def("run_config",
          [](const std::string& text, const std::string& out_dir) {
              const ExperimentConfig cfg = parse_config(text, "<python>");
              RunSummary r;
              {
                  py::gil_scoped_release release;
                  r = run_experiment(cfg, out_dir);
              }
              return summary_dict(r);
          },
          py::arg("text"), py::arg("out_dir"));

    m.def("figure_ids", &figure_ids);

    m.def("reproduce",
          [](const std::string& figure, const std::string& out_dir, std::size_t n_traj, std::uint64_t seed, double dt,
             std::size_t workers, std::size_t n_max) {
              ReproduceOptions o;
              o.n_traj = n_traj;
              o.seed0 = seed;
              o.dt = dt;
              o.workers = workers;
              o.n_max = n_max;
              RunSummary r;
              {
                  py::gil_scoped_release release;
                  r = reproduce(figure, o, out_dir);
              }
              return summary_dict(r);
          },
          py::arg("figure"), py::arg("out_dir"), py::arg("n_traj") = 2000, py::arg("seed") = 1, py::arg("dt") = 1e-3,
          py::arg("workers") = 1, py::arg("n_max") = 0);
}
