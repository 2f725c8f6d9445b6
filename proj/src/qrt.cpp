#include "qnd/qrt.hpp"

#include <cmath>
#include <ostream>

#include "qnd/io.hpp"
#include "qnd/me_engine.hpp"

namespace qnd {

namespace {

std::size_t grid_index(double t, double dt) { return static_cast<std::size_t>(std::llround(t / dt)); }

// Y(x) = e^{i phi} c x + e^{-i phi} x c^dag
struct RegressionSource {
    cd phase;
    Matrix c, cdag;

    explicit RegressionSource(const SystemModel& m)
        : phase(std::exp(kI * m.config.phi)), c(m.measurement_op), cdag(m.measurement_op.adjoint()) {}

    void apply(const Matrix& x, Matrix& out) const {
        out.noalias() = phase * (c * x);
        out.noalias() += std::conj(phase) * (x * cdag);
    }
};

void advance(const Dynamics& dyn, Rk4Propagator& prop, OdeState& x, std::size_t from, std::size_t to, double dt) {
    Matrix work;
    auto rhs = [&](double, const Generator::Frozen& f, double xi, const OdeState& in, OdeState& out) {
        dyn.apply(f, xi, in.m.data(), out.m.data(), work);
    };
    for (std::size_t k = from; k < to; ++k) prop.step(x, static_cast<double>(k) * dt, rhs);
}

}  // namespace

SignalMoments signal_moments(const SystemModel& model, const FilterSpec& filter, bool photon, const QrtOptions& opts) {
    filter.validate();
    const double dt = opts.dt;
    const Dynamics dyn(model, photon);
    const std::size_t nb = dyn.blocks();
    const std::size_t top = dyn.top_block();
    const std::size_t i0 = grid_index(filter.t_i, dt);
    const std::size_t i1 = grid_index(filter.t_f, dt);
    if (i1 <= i0) throw InvalidInput("filter window shorter than one time step");
    const double eta = model.config.eta;
    const double seta = std::sqrt(eta);
    const RegressionSource src(model);
    const bool inline_matched = filter.kind == FilterKind::matched && !filter.tabulated();

    OdeState x;
    x.m = dyn.initial_state();
    Rk4Propagator prop(dyn, dt);
    advance(dyn, prop, x, 0, i0, dt);

    for (std::size_t b = 0; b < nb; ++b) x.m.push_back(Matrix::Zero(x.m[0].rows(), x.m[0].cols()));
    x.s = {0.0, 0.0, 0.0};
    Matrix work, ysrc;
    auto rhs = [&](double t, const Generator::Frozen& f, double xi, const OdeState& in, OdeState& out) {
        dyn.apply(f, xi, in.m.data(), out.m.data(), work);
        dyn.apply(f, xi, in.m.data() + nb, out.m.data() + nb, work);
        const double y = trace_product(in.m[top], model.y_op).real();
        double w;
        if (inline_matched) {
            w = seta * y;
        } else if (filter.kind == FilterKind::boxcar) {
            w = 1.0;  // steps lie entirely inside the window
        } else {
            w = filter.weight(t);
        }
        if (w != 0.0) {
            for (std::size_t b = 0; b < nb; ++b) {
                src.apply(in.m[b], ysrc);
                out.m[nb + b].noalias() += w * ysrc;
            }
        }
        out.s[0] = w * seta * y;
        out.s[1] = w * trace_product(in.m[nb + top], model.y_op).real();
        out.s[2] = w * w;
    };
    for (std::size_t k = i0; k < i1; ++k) prop.step(x, static_cast<double>(k) * dt, rhs);

    SignalMoments r;
    r.mean = x.s[0];
    r.filter_energy = x.s[2];
    r.var = x.s[2] + 2.0 * eta * x.s[1] - r.mean * r.mean;
    return r;
}

SnrResult snr_deterministic(const SystemModel& model, const FilterSpec& filter, const QrtOptions& opts) {
    SnrResult r;
    const SignalMoments one = signal_moments(model, filter, true, opts);
    r.mean1 = one.mean;
    r.var1 = one.var;
    r.filter_energy = one.filter_energy;

    bool shortcut = false;
    if (opts.vacuum_shortcut) shortcut = ground_state_stationary(model, filter.t_f);
    if (shortcut) {
        r.mean0 = 0.0;
        r.var0 = one.filter_energy;
    } else {
        // A matched filter is defined by the one-photon class; the vacuum
        // class must use the same weights.
        FilterSpec f0 = filter.kind == FilterKind::matched ? tabulate_matched_filter(model, filter, opts.dt) : filter;
        const SignalMoments zero = signal_moments(model, f0, false, opts);
        r.mean0 = zero.mean;
        r.var0 = zero.var;
    }
    r.snr_main = r.mean1 / std::sqrt(r.var1 + r.filter_energy);
    r.snr_sm = (r.mean1 - r.mean0) / std::sqrt(r.var1 + r.var0);
    return r;
}

std::vector<double> mean_current(const SystemModel& model, double dt, double t_end) {
    MEOptions o;
    o.dt = dt;
    o.t_end = t_end;
    o.positivity_every = 0;
    const MERecord rec = evolve_me(model, o);
    std::vector<double> j(rec.y.size());
    const double seta = std::sqrt(model.config.eta);
    for (std::size_t i = 0; i < j.size(); ++i) j[i] = seta * rec.y[i];
    return j;
}

FilterSpec tabulate_matched_filter(const SystemModel& model, const FilterSpec& filter, double dt) {
    if (filter.kind != FilterKind::matched || filter.tabulated()) return filter;
    const auto j = mean_current(model, dt, filter.t_f);
    FilterSpec out = filter;
    const std::size_t i0 = grid_index(filter.t_i, dt);
    for (std::size_t k = i0; k < j.size(); ++k) {
        out.times.push_back(static_cast<double>(k) * dt);
        out.values.push_back(j[k]);
    }
    return out;
}

double TwoTimeKernel::symmetry_error() const {
    double e = 0.0;
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) e = std::max(e, std::abs(at(i, j) - at(j, i)));
    }
    return e;
}

TwoTimeKernel two_time_kernel(const SystemModel& model, double t_i, double t_f, double grid_step, double dt,
                              bool photon) {
    if (!(t_f > t_i) || t_i < 0.0) throw InvalidInput("kernel window needs t_f > t_i >= 0");
    const std::size_t ratio = static_cast<std::size_t>(std::llround(grid_step / dt));
    if (ratio == 0 || std::abs(static_cast<double>(ratio) * dt - grid_step) > 1e-9) {
        throw InvalidInput("kernel grid step must be a multiple of dt");
    }
    const double t_end = model.is_fock() ? model.config.pulse.t_end() : model.config.pulse.t_end();
    if (t_f > t_end + 1e-9) throw InvalidInput("kernel window extends past the simulated range");

    const Dynamics dyn(model, photon);
    const std::size_t top = dyn.top_block();
    const RegressionSource src(model);
    const double eta = model.config.eta;
    const std::size_t i0 = grid_index(t_i, dt);
    const std::size_t m = static_cast<std::size_t>(std::llround((t_f - t_i) / grid_step)) + 1;

    TwoTimeKernel k;
    for (std::size_t a = 0; a < m; ++a) k.grid.push_back(static_cast<double>(i0 + a * ratio) * dt);
    k.values.assign(m * m, 0.0);

    // Snapshots of the state at the grid points.
    std::vector<std::vector<Matrix>> snaps;
    OdeState x;
    x.m = dyn.initial_state();
    Rk4Propagator prop(dyn, dt);
    advance(dyn, prop, x, 0, i0, dt);
    snaps.push_back(x.m);
    for (std::size_t a = 1; a < m; ++a) {
        advance(dyn, prop, x, i0 + (a - 1) * ratio, i0 + a * ratio, dt);
        snaps.push_back(x.m);
    }

    for (std::size_t a = 0; a < m; ++a) {
        OdeState z;
        z.m.resize(snaps[a].size());
        for (std::size_t b = 0; b < z.m.size(); ++b) src.apply(snaps[a][b], z.m[b]);
        Rk4Propagator zp(dyn, dt);
        auto value = [&]() {
            const cd v = eta * trace_product(z.m[top], model.y_op);
            k.max_imaginary = std::max(k.max_imaginary, std::abs(v.imag()));
            return v.real();
        };
        k.values[a * m + a] = value();
        for (std::size_t b = a + 1; b < m; ++b) {
            advance(dyn, zp, z, i0 + (b - 1) * ratio, i0 + b * ratio, dt);
            const double v = value();
            k.values[a * m + b] = v;
            k.values[b * m + a] = v;
        }
    }
    return k;
}

double kernel_second_moment(const TwoTimeKernel& k, const FilterSpec& filter) {
    const std::size_t n = k.grid.size();
    if (n < 2) throw InvalidInput("kernel grid too small");
    const double h = k.grid[1] - k.grid[0];
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        // The half-open boxcar excludes t_f; the trapezoid end weight keeps
        // the integral right.
        const double t = k.grid[i];
        double f = filter.kind == FilterKind::boxcar ? ((t >= filter.t_i - 1e-9 && t <= filter.t_f + 1e-9) ? 1.0 : 0.0)
                                                     : filter.weight(std::min(t, filter.t_f - 1e-6));
        w[i] = f * h * ((i == 0 || i + 1 == n) ? 0.5 : 1.0);
    }
    double second = 0.0, energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        energy += w[i] * w[i] / (h * ((i == 0 || i + 1 == n) ? 0.5 : 1.0));
        for (std::size_t j = 0; j < n; ++j) second += w[i] * w[j] * k.at(i, j);
    }
    if (filter.kind == FilterKind::boxcar) energy = filter.t_m();
    return energy + second;
}

void write_kernel_csv(std::ostream& os, const TwoTimeKernel& k) {
    os << "t1,t2,value\n";
    const std::size_t n = k.grid.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) os << csv_row({k.grid[i], k.grid[j], k.at(i, j)}) << '\n';
    }
}

}  // namespace qnd
