#include "qnd/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qnd/io.hpp"

namespace qnd {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were consumed so that
// leftovers (typos) can be reported by full path.
class Fields {
public:
    Fields(const json& obj, std::string path, const std::string& origin) : obj_(obj), path_(std::move(path)), origin_(origin) {
        if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ConfigError(origin_ + ": field '" + field + "': " + what);
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    void number(const std::string& key, double& out, double lo = -HUGE_VAL, double hi = HUGE_VAL) {
        if (const json* v = find(key)) out = as_number(*v, at(key), lo, hi);
    }
    void number(const std::string& key, std::optional<double>& out, double lo = -HUGE_VAL, double hi = HUGE_VAL) {
        if (const json* v = find(key)) out = as_number(*v, at(key), lo, hi);
    }
    template <class Int>
    void integer(const std::string& key, Int& out, long long lo, long long hi) {
        if (const json* v = find(key)) out = static_cast<Int>(as_integer(*v, at(key), lo, hi));
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail(at(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) out = as_string(*v, at(key));
    }

    double as_number(const json& v, const std::string& field, double lo, double hi) const {
        if (!v.is_number()) fail(field, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x) || x < lo || x > hi) {
            fail(field, "value " + format_double(x) + " outside [" + format_double(lo) + ", " + format_double(hi) + "]");
        }
        return x;
    }
    long long as_integer(const json& v, const std::string& field, long long lo, long long hi) const {
        if (!v.is_number_integer()) fail(field, "expected an integer");
        const long long x = v.get<long long>();
        if (x < lo || x > hi) fail(field, "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return x;
    }
    std::string as_string(const json& v, const std::string& field) const {
        if (!v.is_string()) fail(field, "expected a string");
        return v.get<std::string>();
    }

    const json* array(const std::string& key) {
        const json* v = find(key);
        if (v && !v->is_array()) fail(at(key), "expected an array");
        return v;
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) fail(at(it.key()), "unknown field");
        }
    }

    const std::string& origin() const { return origin_; }

private:
    const json& obj_;
    std::string path_;
    const std::string& origin_;
    std::set<std::string> seen_;
};

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

template <class Fn>
void each(Fields& f, const std::string& key, Fn&& fn) {
    if (const json* arr = f.array(key)) {
        for (std::size_t i = 0; i < arr->size(); ++i) fn((*arr)[i], f.at(key) + "[" + std::to_string(i) + "]");
    }
}

void parse_chain(const json& j, ExperimentConfig& c, const std::string& origin) {
    Fields f(j, "chain", origin);
    f.string("shape", c.shape);
    f.integer("n_transmons", c.n_transmons, 1, 64);
    std::string s = to_string(c.source);
    f.string("source", s);
    try {
        c.source = source_kind_from_string(s);
    } catch (const std::exception&) {
        f.fail(f.at("source"), "expected \"cavity\" or \"fock\"");
    }
    f.number("p_loss", c.p_loss, 0.0, 1.0);
    f.number("eta", c.eta, 0.0, 1.0);
    f.number("phi", c.phi);
    f.number("gamma_phi", c.gamma_phi, 0.0);
    f.number("omega_p", c.omega_p, 0.0);
    std::string rep = c.representation == Representation::reduced ? "reduced" : "full";
    f.string("representation", rep);
    if (rep == "reduced") {
        c.representation = Representation::reduced;
    } else if (rep == "full") {
        c.representation = Representation::full;
    } else {
        f.fail(f.at("representation"), "expected \"reduced\" or \"full\"");
    }
    each(f, "transmons", [&](const json& t, const std::string& path) {
        Fields tf(t, path, origin);
        TransmonParams p;
        tf.number("gamma_c", p.gamma_c, 0.0);
        tf.number("gamma_p", p.gamma_p, 0.0);
        tf.number("delta_c", p.delta_c);
        tf.number("delta_p", p.delta_p);
        tf.number("gamma_phi", p.gamma_phi, 0.0);
        tf.finish();
        c.transmons.push_back(p);
    });
    f.finish();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        std::string what = e.what();
        // strip the library prefix "[json.exception.parse_error.101] parse error at line.. : "
        const auto pos = what.find(": ");
        if (pos != std::string::npos) what = what.substr(pos + 2);
        throw ConfigError(origin + ":" + line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + what);
    }

    ExperimentConfig c;
    Fields top(root, "", origin);
    if (const json* v = top.find("chain")) parse_chain(*v, c, origin);
    if (const json* v = top.find("pulse")) {
        Fields f(*v, "pulse", origin);
        f.number("gamma", c.pulse_gamma, 1e-6);
        f.number("t_ph", c.pulse_t_ph);
        f.string("table", c.pulse_table);
        f.finish();
    }
    if (const json* v = top.find("grid")) {
        Fields f(*v, "grid", origin);
        f.number("dt", c.dt, 1e-6, 1.0);
        f.number("t_end", c.t_end, 0.0);
        f.finish();
    }
    if (const json* v = top.find("filter")) {
        Fields f(*v, "filter", origin);
        f.string("kind", c.filter_kind);
        try {
            filter_kind_from_string(c.filter_kind);
        } catch (const std::exception&) {
            f.fail(f.at("kind"), "expected \"boxcar\", \"matched\" or \"table\"");
        }
        f.number("t_i", c.t_i, 0.0);
        f.number("t_f", c.t_f, 0.0);
        f.string("table", c.filter_table);
        if (c.filter_kind == "table" && c.filter_table.empty()) f.fail(f.at("table"), "required for a table filter");
        if (c.t_i && c.t_f && !(*c.t_f > *c.t_i)) f.fail(f.at("t_f"), "must exceed t_i");
        f.finish();
    }
    if (const json* v = top.find("analysis")) {
        Fields f(*v, "analysis", origin);
        f.boolean("me", c.run_me);
        f.boolean("qrt", c.run_qrt);
        f.integer("n_traj", c.n_traj, 0, 100000000);
        if (const json* s = f.find("seed")) {
            if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
                f.fail(f.at("seed"), "expected a non-negative integer");
            }
            c.seed0 = s->get<std::uint64_t>();
        }
        f.integer("workers", c.workers, 1, 1024);
        f.boolean("keep_samples", c.keep_samples);
        f.number("kernel_step", c.kernel_step, 0.0);
        f.number("pair_target", c.pair_target, 0.5, 1.0);
        f.finish();
    }
    if (const json* v = top.find("optimize")) {
        Fields f(*v, "optimize", origin);
        each(f, "free", [&](const json& s, const std::string& path) { c.optimize_free.push_back(f.as_string(s, path)); });
        f.integer("sweeps", c.optimize_sweeps, 1, 10000);
        f.integer("restarts", c.optimize_restarts, 0, 100);
        f.finish();
    }
    if (const json* v = top.find("sweep")) {
        Fields f(*v, "sweep", origin);
        each(f, "n_transmons", [&](const json& x, const std::string& path) {
            c.sweep.n_transmons.push_back(static_cast<std::size_t>(f.as_integer(x, path, 1, 64)));
        });
        each(f, "p_loss", [&](const json& x, const std::string& path) { c.sweep.p_loss.push_back(f.as_number(x, path, 0.0, 1.0)); });
        each(f, "eta", [&](const json& x, const std::string& path) { c.sweep.eta.push_back(f.as_number(x, path, 0.0, 1.0)); });
        each(f, "gamma_phi", [&](const json& x, const std::string& path) {
            c.sweep.gamma_phi.push_back(f.as_number(x, path, 0.0, HUGE_VAL));
        });
        each(f, "shape", [&](const json& x, const std::string& path) { c.sweep.shape.push_back(f.as_string(x, path)); });
        f.finish();
    }
    top.string("output", c.output_dir);
    top.finish();

    // cross-field checks
    try {
        shape_preset(c.shape);
        for (const auto& s : c.sweep.shape) shape_preset(s);
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": field 'chain.shape': " + e.what());
    }
    if (!c.transmons.empty() && c.transmons.size() != c.n_transmons) {
        throw ConfigError(origin + ": field 'chain.transmons': " + std::to_string(c.transmons.size()) +
                          " entries for n_transmons = " + std::to_string(c.n_transmons));
    }
    if (!c.transmons.empty() && !c.sweep.n_transmons.empty()) {
        throw ConfigError(origin + ": field 'sweep.n_transmons': cannot sweep N with explicit per-transmon parameters");
    }
    if (c.source == SourceKind::fock && (c.p_loss > 0.0 || !c.sweep.p_loss.empty())) {
        throw ConfigError(origin + ": field 'chain.p_loss': circulator loss is only supported with a cavity source");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string canonical_json(const ExperimentConfig& c) {
    // nlohmann::json objects are std::map backed: keys come out sorted.
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json transmons = json::array();
    for (const auto& t : c.transmons) {
        transmons.push_back({{"gamma_c", t.gamma_c}, {"gamma_p", t.gamma_p}, {"delta_c", t.delta_c}, {"delta_p", t.delta_p},
                             {"gamma_phi", t.gamma_phi}});
    }
    json j;
    j["chain"] = {{"shape", c.shape},
                  {"n_transmons", c.n_transmons},
                  {"source", to_string(c.source)},
                  {"p_loss", c.p_loss},
                  {"eta", c.eta},
                  {"phi", c.phi},
                  {"gamma_phi", c.gamma_phi},
                  {"omega_p", opt(c.omega_p)},
                  {"representation", c.representation == Representation::reduced ? "reduced" : "full"},
                  {"transmons", transmons}};
    j["pulse"] = {{"gamma", opt(c.pulse_gamma)}, {"t_ph", opt(c.pulse_t_ph)}, {"table", c.pulse_table}};
    j["grid"] = {{"dt", c.dt}, {"t_end", opt(c.t_end)}};
    j["filter"] = {{"kind", c.filter_kind}, {"t_i", opt(c.t_i)}, {"t_f", opt(c.t_f)}, {"table", c.filter_table}};
    j["analysis"] = {{"me", c.run_me},
                     {"qrt", c.run_qrt},
                     {"n_traj", c.n_traj},
                     {"seed", c.seed0},
                     {"workers", c.workers},
                     {"keep_samples", c.keep_samples},
                     {"kernel_step", c.kernel_step},
                     {"pair_target", c.pair_target}};
    j["optimize"] = {{"free", c.optimize_free}, {"sweeps", c.optimize_sweeps}, {"restarts", c.optimize_restarts}};
    j["sweep"] = {{"n_transmons", c.sweep.n_transmons},
                  {"p_loss", c.sweep.p_loss},
                  {"eta", c.sweep.eta},
                  {"gamma_phi", c.sweep.gamma_phi},
                  {"shape", c.sweep.shape}};
    j["output"] = c.output_dir;
    return j.dump(2) + "\n";
}

std::string SweepPoint::tag() const {
    std::string t = shape + "_N" + std::to_string(n_transmons);
    if (p_loss > 0.0) t += "_ploss" + format_double(p_loss);
    if (eta != 1.0) t += "_eta" + format_double(eta);
    if (gamma_phi > 0.0) t += "_gphi" + format_double(gamma_phi);
    return t;
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
    const auto shapes = c.sweep.shape.empty() ? std::vector<std::string>{c.shape} : c.sweep.shape;
    const auto ns = c.sweep.n_transmons.empty() ? std::vector<std::size_t>{c.n_transmons} : c.sweep.n_transmons;
    const auto losses = c.sweep.p_loss.empty() ? std::vector<double>{c.p_loss} : c.sweep.p_loss;
    const auto etas = c.sweep.eta.empty() ? std::vector<double>{c.eta} : c.sweep.eta;
    const auto gphis = c.sweep.gamma_phi.empty() ? std::vector<double>{c.gamma_phi} : c.sweep.gamma_phi;
    std::vector<SweepPoint> pts;
    for (const auto& s : shapes)
        for (auto n : ns)
            for (double l : losses)
                for (double e : etas)
                    for (double g : gphis) pts.push_back({s, n, l, e, g});
    return pts;
}

ChainConfig resolve_chain(const ExperimentConfig& c, const SweepPoint& pt) {
    const ShapePreset& preset = shape_preset(pt.shape);
    ChainOverrides o;
    o.source = c.source;
    o.p_loss = pt.p_loss;
    o.eta = pt.eta;
    o.gamma_phi = pt.gamma_phi;
    o.representation = c.representation;
    ChainConfig chain = preset_chain(preset, pt.n_transmons, o);
    chain.phi = c.phi;
    if (c.omega_p) chain.probe_amplitude = *c.omega_p;
    if (!c.transmons.empty()) chain.transmons = c.transmons;

    double t_end = c.t_end ? *c.t_end : preset_t_end(preset, pt.n_transmons);
    if (c.t_f) t_end = std::max(t_end, *c.t_f);
    if (!c.pulse_table.empty()) {
        chain.pulse = PulseShape::from_table_file(c.pulse_table, t_end).normalized();
    } else if (c.pulse_gamma || c.pulse_t_ph) {
        const double g = c.pulse_gamma.value_or(preset.gamma_ph);
        const double tp = c.pulse_t_ph.value_or(preset.t_ph);
        switch (preset.kind) {
            case PulseKind::gaussian: chain.pulse = PulseShape::gaussian(g, tp, t_end); break;
            case PulseKind::decaying_exp: chain.pulse = PulseShape::decaying_exp(g, tp, t_end); break;
            case PulseKind::rising_exp: chain.pulse = PulseShape::rising_exp(g, tp, t_end); break;
            default: break;
        }
    } else {
        chain.pulse = chain.pulse.with_t_end(t_end);
    }
    chain.validate();
    return chain;
}

FilterSpec resolve_filter(const ExperimentConfig& c, const SweepPoint& pt) {
    const FilterKind kind = filter_kind_from_string(c.filter_kind);
    if (kind == FilterKind::table) {
        std::vector<double> t, v;
        read_two_column(c.filter_table, t, v);
        return FilterSpec::table(std::move(t), std::move(v));
    }
    const FilterSpec w = preset_window(shape_preset(pt.shape), pt.n_transmons);
    if (kind == FilterKind::matched) {
        // default: the whole record
        const double t_end = c.t_end ? *c.t_end : preset_t_end(shape_preset(pt.shape), pt.n_transmons);
        return FilterSpec::matched(c.t_i.value_or(0.0), c.t_f.value_or(t_end));
    }
    return FilterSpec::boxcar(c.t_i.value_or(w.t_i), c.t_f.value_or(w.t_f));
}

}  // namespace qnd
