#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qnd/detection.hpp"
#include "qnd/me_engine.hpp"
#include "qnd/presets.hpp"
#include "qnd/qrt.hpp"
#include "qnd/rng.hpp"
#include "qnd/sme_engine.hpp"

using namespace qnd;

namespace {

ChainConfig chain(std::size_t n, SourceKind src = SourceKind::cavity) {
    ChainOverrides o;
    o.source = src;
    return preset_chain(shape_preset("gaussian"), n, o);
}

SMEOptions opts(const FilterSpec& w) {
    SMEOptions o;
    o.dt = 1e-3;
    o.filters = {w};
    return o;
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
    using P = Philox4x32;
    CHECK(P::block({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(P::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(P::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal stream moments and reproducibility") {
    NormalStream a(42, 0), b(42, 0), c(42, 1);
    const int n = 200000;
    double s = 0.0, s2 = 0.0, s4 = 0.0;
    bool same = true, differ = false;
    for (int i = 0; i < n; ++i) {
        const double x = a.next();
        same = same && (x == b.next());
        differ = differ || (x != c.next());
        s += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    CHECK(same);
    CHECK(differ);
    CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.015));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("trajectories are fixed by the seed") {
    const SystemModel m = build_chain(chain(2));
    const SMEOptions o = opts(default_window(2));
    const HomodyneRecord a = simulate_trajectory(m, true, 7, o);
    const HomodyneRecord b = simulate_trajectory(m, true, 7, o);
    const HomodyneRecord c = simulate_trajectory(m, true, 8, o);
    CHECK(a.signals[0] == b.signals[0]);
    CHECK(a.signals[0] != c.signals[0]);
    CHECK(a.valid);
}

TEST_CASE("batch results do not depend on the worker count") {
    const SystemModel m = build_chain(chain(1));
    const SMEOptions o = opts(default_window(1));
    const auto one = batch_signals(run_batch(m, true, 12, 100, o, 1), 0);
    const auto three = batch_signals(run_batch(m, true, 12, 100, o, 3), 0);
    CHECK(one == three);
    const auto single = simulate_trajectory(m, true, 105, o);
    CHECK(one[5] == single.signals[0]);
}

TEST_CASE("vacuum shortcut draws the same noise as the full integration") {
    const SystemModel m = build_chain(chain(2));
    SMEOptions fast = opts(default_window(2)), slow = fast;
    slow.vacuum_shortcut = false;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const double a = simulate_trajectory(m, false, seed, fast).signals[0];
        const double b = simulate_trajectory(m, false, seed, slow).signals[0];
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("conditioned states average to the master equation") {
    const SystemModel m = build_chain(chain(1));
    SMEOptions o = opts(default_window(1));
    o.keep_conditioned_y = true;
    o.t_end = 8.0;
    const std::size_t n = 300;
    const BatchResult b = run_batch(m, true, n, 1, o, 2);
    MEOptions me;
    me.t_end = 8.0;
    const MERecord r = evolve_me(m, me);
    for (std::size_t k : {2000u, 4000u, 5000u, 6000u, 7500u}) {
        double s = 0.0, s2 = 0.0;
        for (const auto& rec : b.records) {
            s += rec.conditioned_y[k];
            s2 += rec.conditioned_y[k] * rec.conditioned_y[k];
        }
        const double mean = s / n;
        const double sd = std::sqrt(std::max(s2 / n - mean * mean, 0.0));
        CHECK_MESSAGE(std::abs(mean - r.y[k]) < 4.0 * sd / std::sqrt(double(n)) + 2e-3, "t index ", k);
    }
}

TEST_CASE("single-photon signal statistics match the regression theorem") {
    const SystemModel m = build_chain(chain(1));
    const FilterSpec w = default_window(1);
    const std::size_t n = 600;
    const auto s1 = batch_signals(run_batch(m, true, n, 1, opts(w), 2), 0);
    const auto s0 = batch_signals(run_batch(m, false, n, 1, opts(w), 2), 0);
    const SnrResult q = snr_deterministic(m, w);
    const SampleStats a = sample_stats(s1), z = sample_stats(s0);
    CHECK(std::abs(a.mean - q.mean1) < 4.0 * std::sqrt(a.var / n));
    CHECK(std::abs(z.mean) < 4.0 * std::sqrt(z.var / n));
    // variance of a sample variance ~ 2 sigma^4 / n for near-normal data
    CHECK(std::abs(z.var - q.var0) < 4.0 * q.var0 * std::sqrt(2.0 / n));
}

TEST_CASE("Fock-source trajectories stay normalised") {
    const SystemModel m = build_chain(chain(2, SourceKind::fock));
    SMEOptions o = opts(default_window(2));
    o.keep_samples = true;
    const auto rec = simulate_trajectory(m, true, 3, o);
    CHECK(rec.valid);
    CHECK(rec.j.size() == step_count(default_window(2).t_f, 1e-3));
    CHECK(signal(rec, default_window(2)) == doctest::Approx(rec.signals[0]).epsilon(1e-12));
    std::ostringstream os;
    write_record_csv(os, rec);
    CHECK(os.str().rfind("t,j\n", 0) == 0);
}

TEST_CASE("untabulated matched filters are rejected by the trajectory engine") {
    const SystemModel m = build_chain(chain(1));
    SMEOptions o;
    o.filters = {FilterSpec::matched(0.0, 8.0)};
    CHECK_THROWS_AS(simulate_trajectory(m, true, 1, o), InvalidInput);
    CHECK_THROWS_AS(run_batch(m, true, 0, 1, opts(default_window(1))), InvalidInput);
}
