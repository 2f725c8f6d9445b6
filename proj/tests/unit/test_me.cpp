#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qnd/me_engine.hpp"
#include "qnd/presets.hpp"

using namespace qnd;

namespace {

ChainConfig chain(const std::string& shape, std::size_t n, SourceKind src) {
    ChainOverrides o;
    o.source = src;
    return preset_chain(shape_preset(shape), n, o);
}

MERecord run(const ChainConfig& c, double dt = 1e-3, double t_end = std::numeric_limits<double>::quiet_NaN()) {
    MEOptions o;
    o.dt = dt;
    o.t_end = t_end;
    return evolve_me(build_chain(c), o);
}

}  // namespace

TEST_CASE("trace, hermiticity and positivity hold along a run") {
    for (auto src : {SourceKind::cavity, SourceKind::fock}) {
        const MERecord r = run(chain("gaussian", 2, src), 2e-3);
        CHECK(r.invariants.max_trace_drift < 1e-9);
        CHECK(r.invariants.max_hermiticity_error < 1e-12);
        CHECK(r.invariants.min_eigenvalue > -1e-9);
        for (double tr : r.trace) CHECK(std::abs(tr - 1.0) < 1e-9);
    }
}

TEST_CASE("single transmon without probe follows the one-photon excitation amplitude") {
    // Oracle: c' = -(Gamma/2) c - sqrt(Gamma) xi(t), P_exc = |c|^2, integrated
    // here with a plain RK4 on the envelope.
    ChainConfig c = chain("gaussian", 1, SourceKind::fock);
    c.probe_amplitude = 0.0;
    const double g = c.transmons[0].gamma_c;
    const double dt = 1e-3;
    const MERecord r = run(c, dt, 12.0);
    const auto& p = c.pulse;
    auto rhs = [&](double t, double y) { return -0.5 * g * y - std::sqrt(g) * p.xi(t); };
    double y = 0.0, worst = 0.0;
    for (std::size_t k = 0; k + 1 < r.t.size(); ++k) {
        worst = std::max(worst, std::abs(y * y - r.p_exc[0][k]));
        const double t = r.t[k];
        const double k1 = rhs(t, y), k2 = rhs(t + dt / 2, y + dt / 2 * k1), k3 = rhs(t + dt / 2, y + dt / 2 * k2),
                     k4 = rhs(t + dt, y + dt * k3);
        y += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK(worst < 1e-8);
    // the same from the cavity-source picture
    ChainConfig cc = c;
    cc.source = SourceKind::cavity;
    const MERecord rc = run(cc, dt, 12.0);
    double worst_c = 0.0;
    for (std::size_t k = 0; k < rc.t.size(); ++k) worst_c = std::max(worst_c, std::abs(rc.p_exc[0][k] - r.p_exc[0][k]));
    CHECK(worst_c < 5e-5);  // the cavity picture clips kappa where the tail runs out
}

TEST_CASE("cavity and Fock pictures give the same homodyne mean") {
    for (const std::string shape : {"gaussian", "decaying_exp", "rising_exp"}) {
        const MERecord a = run(chain(shape, 2, SourceKind::cavity));
        const MERecord b = run(chain(shape, 2, SourceKind::fock));
        REQUIRE(a.y.size() == b.y.size());
        double worst = 0.0;
        for (std::size_t k = 0; k < a.y.size(); ++k) worst = std::max(worst, std::abs(a.y[k] - b.y[k]));
        CHECK_MESSAGE(worst < 1e-3, shape);
    }
}

TEST_CASE("Fock top block is the reduced state of the cavity-source model") {
    // Full tensor layout with the source cavity as the leading factor: tracing
    // it out of the cavity run must reproduce rho_11 of the hierarchy.
    for (std::size_t n : {1u, 2u}) {
        ChainConfig cc = chain("gaussian", n, SourceKind::cavity), fc = chain("gaussian", n, SourceKind::fock);
        cc.representation = fc.representation = Representation::full;
        const SystemModel mc = build_chain(cc), mf = build_chain(fc);
        REQUIRE(mc.dim == 2 * mf.dim);
        for (double t_end : {3.0, 5.5, 9.0}) {
            const MERecord a = run(cc, 1e-3, t_end), b = run(fc, 1e-3, t_end);
            const auto d = static_cast<Eigen::Index>(mf.dim);
            const Matrix& rho = a.final_blocks[0];
            const Matrix reduced = rho.block(0, 0, d, d) + rho.block(d, d, d, d);
            CHECK(max_abs(reduced - b.final_blocks[2]) < 1e-9);
            CHECK(min_eigenvalue(b.final_blocks[2]) > -1e-10);
        }
    }
}

TEST_CASE("the photon is transmitted") {
    const MERecord f = run(chain("gaussian", 1, SourceKind::fock), 1e-3, 20.0);
    CHECK(f.integrated_flux.back() == doctest::Approx(1.0).epsilon(2e-3));
    const MERecord c = run(chain("gaussian", 1, SourceKind::cavity), 1e-3, 20.0);
    CHECK(c.integrated_flux.back() == doctest::Approx(1.0).epsilon(2e-3));
    // flux is never negative
    for (double v : f.flux) CHECK(v > -1e-9);
}

TEST_CASE("integrated_flux is a trapezoid") {
    CHECK(integrated_flux({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(integrated_flux({0.0, 1.0}, {0.0}), InvalidInput);
}

TEST_CASE("vacuum input stays in the ground state") {
    const SystemModel m = build_chain(chain("gaussian", 2, SourceKind::cavity));
    CHECK(ground_state_stationary(m, 16.0));
    MEOptions o;
    o.photon = false;
    o.dt = 2e-3;
    const MERecord r = evolve_me(m, o);
    for (double y : r.y) CHECK(std::abs(y) < 1e-12);
    for (const auto& p : r.p_exc)
        for (double v : p) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("step counts and record decimation") {
    CHECK(step_count(1.0, 1e-3) == 1000);
    CHECK(step_count(1.0005, 1e-3) == 1001);
    MEOptions o;
    o.dt = 1e-3;
    o.t_end = 1.0;
    o.record_every = 100;
    const MERecord r = evolve_me(build_chain(chain("gaussian", 1, SourceKind::cavity)), o);
    CHECK(r.t.size() == 11);
    CHECK(r.t.back() == doctest::Approx(1.0));
}

TEST_CASE("trajectory CSV layout") {
    MEOptions o;
    o.dt = 1e-2;
    o.t_end = 0.05;
    const MERecord r = evolve_me(build_chain(chain("gaussian", 2, SourceKind::cavity)), o);
    std::ostringstream os;
    write_trajectory_csv(os, r);
    const std::string s = os.str();
    CHECK(s.rfind("t,y,p_exc_1,p_exc_2,trace,flux,integrated_flux\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 7);
}

TEST_CASE("unstable steps are reported") {
    MEOptions o;
    o.dt = 1.5;
    CHECK_THROWS_AS(evolve_me(build_chain(chain("gaussian", 2, SourceKind::cavity)), o), IntegrationFailure);
    o.dt = -1.0;
    CHECK_THROWS_AS(evolve_me(build_chain(chain("gaussian", 1, SourceKind::cavity)), o), InvalidInput);
}
