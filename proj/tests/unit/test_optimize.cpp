#include <doctest.h>

#include <cmath>
#include <limits>

#include "qnd/optimize.hpp"
#include "qnd/qrt.hpp"

using namespace qnd;

TEST_CASE("one-parameter quadratic converges to the vertex") {
    auto f = [](const std::vector<double>& x) { return 3.0 - 2.0 * (x[0] - 1.37) * (x[0] - 1.37); };
    OptimizerOptions o;
    o.restarts = 0;  // restarts append their own climbs to the trace
    const OptimizerResult r = maximize(f, {0.0}, {{"x", -5.0, 5.0, 0.5}}, o);
    CHECK(r.x[0] == doctest::Approx(1.37).epsilon(1e-4));
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(r.trace_value.front() == r.start_value);
    for (std::size_t i = 1; i < r.trace_value.size(); ++i) CHECK(r.trace_value[i] >= r.trace_value[i - 1]);
}

TEST_CASE("coupled quadratic in two parameters") {
    auto f = [](const std::vector<double>& x) {
        const double a = x[0] - 0.5, b = x[1] + 0.25;
        return -(a * a + b * b + 0.8 * a * b);
    };
    const OptimizerResult r = maximize(f, {2.0, 2.0}, {{"a", -3.0, 3.0, 0.4}, {"b", -3.0, 3.0, 0.4}});
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(r.x[1] == doctest::Approx(-0.25).epsilon(1e-3));
}

TEST_CASE("bounds are respected") {
    auto f = [](const std::vector<double>& x) { return x[0]; };
    const OptimizerResult r = maximize(f, {0.0}, {{"x", -1.0, 2.0, 0.3}});
    CHECK(r.x[0] == doctest::Approx(2.0));
    for (const auto& x : r.trace_x) CHECK(x[0] <= 2.0);
}

TEST_CASE("non-finite regions shrink the step instead of failing") {
    auto f = [](const std::vector<double>& x) {
        if (x[0] > 1.2) return std::numeric_limits<double>::quiet_NaN();
        return -(x[0] - 1.0) * (x[0] - 1.0);
    };
    const OptimizerResult r = maximize(f, {0.0}, {{"x", -3.0, 3.0, 0.5}});
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
    auto bad = [](const std::vector<double>&) { return std::numeric_limits<double>::infinity(); };
    CHECK_THROWS_AS(maximize(bad, {0.0}, {{"x", -1.0, 1.0, 0.1}}), InvalidInput);
    CHECK_THROWS_AS(maximize(f, {0.0, 1.0}, {{"x", -1.0, 1.0, 0.1}}), InvalidInput);
}

TEST_CASE("runs are deterministic") {
    auto f = [](const std::vector<double>& x) { return std::cos(3.0 * x[0]) - 0.1 * x[0] * x[0]; };
    const OptimizerResult a = maximize(f, {1.0}, {{"x", -4.0, 4.0, 0.5}});
    const OptimizerResult b = maximize(f, {1.0}, {{"x", -4.0, 4.0, 0.5}});
    CHECK(a.x == b.x);
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("the tabulated Gaussian couplings are close to optimal") {
    const ChainConfig c = preset_chain(shape_preset("gaussian"), 4);
    const FilterSpec w = preset_window(shape_preset("gaussian"), 4);
    OptimizerOptions o;
    o.restarts = 1;
    const ChainOptimization r = optimize_chain(c, w, {"gamma_c", "omega_p"}, o);
    CHECK(r.result.value >= r.result.start_value);
    CHECK(r.result.value <= 1.02 * r.result.start_value);
}

TEST_CASE("zero detuning is locally optimal") {
    const ChainConfig c = preset_chain(shape_preset("gaussian"), 6);
    const FilterSpec w = preset_window(shape_preset("gaussian"), 6);
    OptimizerOptions o;
    o.restarts = 0;
    o.max_sweeps = 6;
    const ChainOptimization r = optimize_chain(c, w, {"delta_c", "delta_p"}, o);
    CHECK(std::abs(r.result.x[0]) < 0.05);
    CHECK(std::abs(r.result.x[1]) < 0.05);
    CHECK(r.result.value == doctest::Approx(r.result.start_value).epsilon(1e-6));
}

TEST_CASE("parameter names map onto the chain") {
    ChainConfig c = preset_chain(shape_preset("gaussian"), 3);
    FilterSpec w = preset_window(shape_preset("gaussian"), 3);
    const ChainParameters p = chain_parameters(c, w, {"gamma_c3", "gamma_p_ratio", "t_f"});
    REQUIRE(p.names.size() == 3);
    apply_parameters(p, {2.5, 3.0, 10.0}, c, w);
    CHECK(c.transmons[2].gamma_c == 2.5);
    CHECK(c.transmons[2].gamma_p == doctest::Approx(7.5));
    CHECK(c.transmons[0].gamma_p == doctest::Approx(3.0));
    CHECK(w.t_f == 10.0);
    CHECK_THROWS_AS(chain_parameters(c, w, {"gamma_c9"}), InvalidInput);
    CHECK_THROWS_AS(chain_parameters(c, w, {"bogus"}), InvalidInput);
}
