#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qnd/me_engine.hpp"
#include "qnd/presets.hpp"
#include "qnd/qrt.hpp"

using namespace qnd;

namespace {

ChainConfig chain(std::size_t n, double eta = 1.0, SourceKind src = SourceKind::cavity) {
    ChainOverrides o;
    o.eta = eta;
    o.source = src;
    return preset_chain(shape_preset("gaussian"), n, o);
}

}  // namespace

TEST_CASE("vacuum signal is pure shot noise") {
    const SystemModel m = build_chain(chain(2));
    const FilterSpec w = FilterSpec::boxcar(4.0, 9.5);
    for (bool shortcut : {true, false}) {
        QrtOptions o;
        o.vacuum_shortcut = shortcut;
        const SignalMoments s = signal_moments(m, w, false, o);
        CHECK(std::abs(s.mean) < 1e-12);
        CHECK(s.var == doctest::Approx(5.5).epsilon(1e-9));
        CHECK(s.filter_energy == doctest::Approx(5.5).epsilon(1e-9));
    }
}

TEST_CASE("mean signal equals the filtered master-equation mean") {
    const SystemModel m = build_chain(chain(2, 0.7));
    const FilterSpec w = FilterSpec::boxcar(4.0, 9.5);
    const double dt = 1e-3;
    QrtOptions o;
    o.dt = dt;
    const SignalMoments s = signal_moments(m, w, true, o);
    MEOptions me;
    me.dt = dt;
    me.t_end = 10.0;
    const MERecord r = evolve_me(m, me);
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < r.t.size(); ++k) {
        const double mid = 0.5 * (r.t[k] + r.t[k + 1]);
        if (mid >= 4.0 && mid < 9.5) integral += 0.5 * (r.y[k] + r.y[k + 1]) * dt;
    }
    CHECK(s.mean == doctest::Approx(std::sqrt(0.7) * integral).epsilon(1e-6));
}

TEST_CASE("efficiency scales mean by sqrt(eta) and excess variance by eta") {
    const FilterSpec w = default_window(3);
    const SnrResult a = snr_deterministic(build_chain(chain(3, 1.0)), w);
    const SnrResult b = snr_deterministic(build_chain(chain(3, 0.5)), w);
    CHECK(b.mean1 == doctest::Approx(std::sqrt(0.5) * a.mean1).epsilon(1e-10));
    CHECK(b.var1 - b.filter_energy == doctest::Approx(0.5 * (a.var1 - a.filter_energy)).epsilon(1e-9));
}

TEST_CASE("explicit two-time kernel agrees with the forward pass") {
    const SystemModel m = build_chain(chain(2));
    const FilterSpec w = FilterSpec::boxcar(4.0, 9.0);
    const SignalMoments s = signal_moments(m, w, true);
    const TwoTimeKernel k = two_time_kernel(m, 4.0, 9.0, 0.05, 1e-3);
    CHECK(k.symmetry_error() < 1e-10);
    CHECK(k.max_imaginary < 1e-10);
    const double second = kernel_second_moment(k, w);
    CHECK(second == doctest::Approx(s.var + s.mean * s.mean).epsilon(2e-3));
    std::ostringstream os;
    write_kernel_csv(os, k);
    CHECK(os.str().rfind("t1,t2,value\n", 0) == 0);
}

TEST_CASE("both SNR conventions agree when the vacuum variance is the window") {
    const SnrResult r = snr_deterministic(build_chain(chain(1)), default_window(1));
    CHECK(r.snr_main == doctest::Approx(r.snr_sm).epsilon(1e-12));
    CHECK(r.snr_main == doctest::Approx(r.mean1 / std::sqrt(r.var1 + r.filter_energy)));
}

TEST_CASE("cavity and Fock pictures give the same SNR") {
    const FilterSpec w = default_window(3);
    const SnrResult a = snr_deterministic(build_chain(chain(3)), w);
    const SnrResult b = snr_deterministic(build_chain(chain(3, 1.0, SourceKind::fock)), w);
    CHECK(a.snr_main == doctest::Approx(b.snr_main).epsilon(1e-6));
}

TEST_CASE("matched filter beats the boxcar") {
    const ChainConfig c = chain(2);
    const SystemModel m = build_chain(c);
    const SnrResult box = snr_deterministic(m, default_window(2));
    const SnrResult mf = snr_deterministic(m, FilterSpec::matched(0.0, c.pulse.t_end()));
    CHECK(mf.snr_main >= box.snr_main);
}

TEST_CASE("tabulated matched filter reproduces the on-the-fly one") {
    const ChainConfig c = chain(1);
    const SystemModel m = build_chain(c);
    const FilterSpec mf = FilterSpec::matched(0.0, 12.0);
    const FilterSpec tab = tabulate_matched_filter(m, mf, 1e-3);
    CHECK(tab.tabulated());
    const SnrResult a = snr_deterministic(m, mf);
    const SnrResult b = snr_deterministic(m, tab);
    CHECK(a.snr_main == doctest::Approx(b.snr_main).epsilon(1e-5));
}

TEST_CASE("halving the step leaves the SNR unchanged") {
    const SystemModel m = build_chain(chain(3));
    QrtOptions a, b;
    a.dt = 1e-3;
    b.dt = 5e-4;
    const double s1 = snr_deterministic(m, default_window(3), a).snr_main;
    const double s2 = snr_deterministic(m, default_window(3), b).snr_main;
    CHECK(std::abs(s1 - s2) < 1e-6);
}

TEST_CASE("filters are validated") {
    CHECK_THROWS_AS(FilterSpec::boxcar(5.0, 4.0).validate(), InvalidInput);
    CHECK_THROWS_AS(FilterSpec::matched(0.0, 4.0).weight(1.0), InvalidInput);
    const FilterSpec b = FilterSpec::boxcar(1.0, 2.0);
    CHECK(b.weight(1.0) == 1.0);
    CHECK(b.weight(2.0) == 0.0);
    CHECK(b.weight(0.5) == 0.0);
    const FilterSpec t = FilterSpec::table({0.0, 1.0}, {0.0, 2.0});
    CHECK(t.weight(0.25) == doctest::Approx(0.5));
    CHECK(filter_kind_from_string(to_string(FilterKind::matched)) == FilterKind::matched);
}
