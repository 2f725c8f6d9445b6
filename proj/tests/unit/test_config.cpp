#include <doctest.h>

#include <string>

#include "qnd/config.hpp"

using namespace qnd;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "cfg.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("empty object gives the documented defaults") {
    const ExperimentConfig c = parse_config("{}");
    CHECK(c.shape == "gaussian");
    CHECK(c.n_transmons == 1);
    CHECK(c.source == SourceKind::cavity);
    CHECK(c.eta == 1.0);
    CHECK(c.dt == 1e-3);
    CHECK(c.n_traj == 0);
    CHECK(c.seed0 == 1);
    CHECK(c.filter_kind == "boxcar");
}

TEST_CASE("fields are read from their sections") {
    const ExperimentConfig c = parse_config(R"({
        // comments are allowed
        "chain": {"shape": "rising_exp", "n_transmons": 3, "source": "fock", "eta": 0.8},
        "grid": {"dt": 0.002},
        "filter": {"kind": "boxcar", "t_i": 9.5, "t_f": 15.0},
        "analysis": {"n_traj": 50, "seed": 9, "workers": 2},
        "sweep": {"n_transmons": [1, 2], "eta": [0.5, 1.0]},
        "output": "out/x"
    })");
    CHECK(c.shape == "rising_exp");
    CHECK(c.n_transmons == 3);
    CHECK(c.source == SourceKind::fock);
    CHECK(c.eta == 0.8);
    CHECK(c.dt == 0.002);
    CHECK(*c.t_i == 9.5);
    CHECK(c.n_traj == 50);
    CHECK(c.seed0 == 9);
    CHECK(c.output_dir == "out/x");
    CHECK(sweep_points(c).size() == 4);
}

TEST_CASE("syntax errors carry line and column") {
    const std::string e = error_of("{\n  \"chain\": {\n    \"eta\": 0.5,\n  }\n}");
    CHECK(contains(e, "cfg.json:4:"));
}

TEST_CASE("field errors carry the field path") {
    CHECK(contains(error_of(R"({"chain": {"eta": 1.5}})"), "'chain.eta'"));
    CHECK(contains(error_of(R"({"chain": {"eta": "high"}})"), "expected a number"));
    CHECK(contains(error_of(R"({"chain": {"n_transmon": 3}})"), "'chain.n_transmon': unknown field"));
    CHECK(contains(error_of(R"({"chain": {"source": "laser"}})"), "'chain.source'"));
    CHECK(contains(error_of(R"({"chain": {"shape": "square"}})"), "'chain.shape'"));
    CHECK(contains(error_of(R"({"sweep": {"eta": [0.5, 2.0]}})"), "'sweep.eta[1]'"));
    CHECK(contains(error_of(R"({"analysis": {"n_traj": 2.5}})"), "expected an integer"));
    CHECK(contains(error_of(R"({"filter": {"t_i": 5, "t_f": 4}})"), "'filter.t_f'"));
    CHECK(contains(error_of(R"({"filter": {"kind": "table"}})"), "'filter.table'"));
    CHECK(contains(error_of(R"({"chain": {"source": "fock", "p_loss": 0.1}})"), "'chain.p_loss'"));
    CHECK(contains(error_of(R"({"chain": {"n_transmons": 2, "transmons": [{"gamma_c": 1}]}})"), "'chain.transmons'"));
    CHECK(contains(error_of(R"([1, 2])"), "expected an object"));
}

TEST_CASE("canonical form is stable under a round trip") {
    const ExperimentConfig c = parse_config(R"({"chain": {"n_transmons": 2, "omega_p": 0.3}, "sweep": {"p_loss": [0, 0.04]}})");
    const std::string once = canonical_json(c);
    const std::string twice = canonical_json(parse_config(once));
    CHECK(once == twice);
    // keys are sorted
    CHECK(once.find("\"analysis\"") < once.find("\"chain\""));
    CHECK(once.find("\"chain\"") < once.find("\"sweep\""));
    CHECK(once.back() == '\n');
    CHECK(once.find('\r') == std::string::npos);
}

TEST_CASE("resolved chains follow presets and overrides") {
    ExperimentConfig c = parse_config(R"({"chain": {"n_transmons": 3, "omega_p": 0.5, "gamma_phi": 0.1}})");
    const SweepPoint pt = sweep_points(c).front();
    const ChainConfig ch = resolve_chain(c, pt);
    CHECK(ch.n_transmons() == 3);
    CHECK(ch.probe_amplitude == 0.5);
    CHECK(ch.transmons[2].gamma_phi == 0.1);
    const FilterSpec w = resolve_filter(c, pt);
    CHECK(w.t_i == 4.0);
    CHECK(w.t_f == doctest::Approx(11.0));
    CHECK(pt.tag() == "gaussian_N3_gphi0.1");

    c.filter_kind = "matched";
    const FilterSpec m = resolve_filter(c, pt);
    CHECK(m.kind == FilterKind::matched);
    CHECK(m.t_i == 0.0);
}

TEST_CASE("sweep axes form a Cartesian product") {
    ExperimentConfig c;
    c.sweep.n_transmons = {1, 2, 3};
    c.sweep.p_loss = {0.0, 0.08};
    const auto pts = sweep_points(c);
    CHECK(pts.size() == 6);
    CHECK(pts[1].p_loss == 0.08);
    CHECK(pts[2].n_transmons == 2);
}

TEST_CASE("missing config files are reported") {
    CHECK_THROWS_AS(load_config("no/such/config.json"), ConfigError);
}
