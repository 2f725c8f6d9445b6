#include "qnd/me_engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "qnd/io.hpp"

namespace qnd {

void OdeState::set_zero_like(const OdeState& other) {
    m.resize(other.m.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i].setZero(other.m[i].rows(), other.m[i].cols());
    s.assign(other.s.size(), 0.0);
}

void OdeState::axpy(double a, const OdeState& x) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i].noalias() += a * x.m[i];
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += a * x.s[i];
}

Dynamics::Dynamics(const SystemModel& model, bool photon) : model_(model), generator_(model), photon_(photon) {
    if (!model_.is_fock()) {
        const auto d = static_cast<Eigen::Index>(model_.dim);
        source_op_ = Matrix::Zero(d, d);
        for (const auto& t : model_.network.L.at(0).terms()) {
            if (!t.envelope.is_constant()) source_op_ += t.op;
        }
    }
}

double Dynamics::xi(double t) const {
    if (!fock() || !photon_) return 0.0;
    return model_.config.pulse.xi(t);
}

std::vector<Matrix> Dynamics::initial_state() const {
    if (!fock()) return {photon_ ? model_.photon_state : model_.ground_state};
    // the off-diagonal block is Tr_field of |0><1|, which vanishes at t = 0
    const Matrix zero = Matrix::Zero(model_.ground_state.rows(), model_.ground_state.cols());
    return {model_.ground_state, zero, model_.ground_state};
}

void Dynamics::apply(const Generator::Frozen& f, double xi, const Matrix* x, Matrix* out, Matrix& work) const {
    if (!fock()) {
        Generator::apply_hermitian(f, x[0], out[0], work);
        return;
    }
    const Matrix& l = model_.input_coupling;
    Generator::apply_hermitian(f, x[0], out[0], work);
    Generator::apply(f, x[1], out[1], work);
    Generator::apply_hermitian(f, x[2], out[2], work);
    if (xi != 0.0) {
        // d r01 += xi* [L, r00];  d r11 += xi [r01, L^dag] + h.c.
        out[1].noalias() += xi * (l * x[0]);
        out[1].noalias() -= xi * (x[0] * l);
        work.noalias() = xi * (x[1] * l.adjoint());
        work.noalias() -= xi * (l.adjoint() * x[1]);
        out[2] += work;
        out[2] += work.adjoint();
    }
}

double Dynamics::flux(double t, const Matrix* x) const {
    if (!fock()) {
        const Matrix c = model_.config.pulse.sqrt_kappa(t) * source_op_ + model_.input_coupling;
        return trace_product(x[0], c.adjoint() * c).real();
    }
    GDMHierarchy h;
    h.r00 = x[0];
    h.r01 = x[1];
    h.r10 = x[1].adjoint();
    h.r11 = x[2];
    return output_flux(model_, h, xi(t));
}

double Dynamics::source_rate(double t) const {
    return fock() ? 0.0 : model_.config.pulse.kappa(t);
}

std::size_t step_count(double t_end, double dt) {
    if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
    if (!(t_end > 0.0)) throw InvalidInput("integration end time must be positive");
    return static_cast<std::size_t>(std::llround(std::ceil(t_end / dt - 1e-9)));
}

double output_flux(const SystemModel& model, const GDMHierarchy& h, double xi) {
    const Matrix& l = model.input_coupling;
    const double diag = trace_product(h.r11, l.adjoint() * l).real();
    const double cross = 2.0 * (xi * trace_product(h.r10, l)).real();
    return diag + cross + xi * xi;
}

double integrated_flux(const std::vector<double>& t, const std::vector<double>& flux) {
    if (t.size() != flux.size()) throw InvalidInput("integrated_flux: time and flux samples differ in length");
    double e = 0.0;
    for (std::size_t i = 1; i < t.size() && i < flux.size(); ++i) e += 0.5 * (t[i] - t[i - 1]) * (flux[i] + flux[i - 1]);
    return e;
}

GDMHierarchy to_hierarchy(const std::vector<Matrix>& blocks, double t) {
    if (blocks.size() != 3) throw InvalidInput("hierarchy needs three stored blocks");
    return {blocks[0], blocks[1], blocks[1].adjoint(), blocks[2], t};
}

bool ground_state_stationary(const SystemModel& model, double t_end) {
    if (max_abs(model.measurement_op * model.ground_state) > 1e-14) return false;
    const Dynamics dyn(model, false);
    const auto blocks = dyn.initial_state();
    std::vector<Matrix> outs(blocks.size());
    Generator::Frozen f;
    Matrix work;
    for (double t = 0.0; t <= t_end + 1e-12; t += 0.25) {
        dyn.generator().freeze(t, f);
        dyn.apply(f, 0.0, blocks.data(), outs.data(), work);
        for (const auto& o : outs) {
            if (max_abs(o) > 1e-13) return false;
        }
    }
    return true;
}

SystemModel add_dephasing(const SystemModel& model, const std::vector<double>& gamma_phi) {
    return with_dephasing(model, gamma_phi);
}

namespace {

void record_sample(const Dynamics& dyn, double t, const OdeState& x, MERecord& rec) {
    const auto& model = dyn.model();
    const Matrix& top = x.m[dyn.top_block()];
    rec.t.push_back(t);
    rec.y.push_back(trace_product(top, model.y_op).real());
    for (std::size_t k = 0; k < model.excitation_projectors.size(); ++k) {
        rec.p_exc[k].push_back(trace_product(top, model.excitation_projectors[k]).real());
    }
    rec.trace.push_back(top.trace().real());
    rec.flux.push_back(dyn.flux(t, x.m.data()));
    rec.integrated_flux.push_back(x.s[0]);
}

void check_invariants(const Dynamics& dyn, const OdeState& x, bool positivity, double tol, double t,
                      InvariantReport& inv) {
    const std::size_t hermitian_blocks[2] = {0, dyn.top_block()};
    for (std::size_t b : hermitian_blocks) {
        const Matrix& m = x.m[b];
        const double drift = std::abs(m.trace() - cd{1.0, 0.0});
        inv.max_trace_drift = std::max(inv.max_trace_drift, drift);
        inv.max_hermiticity_error = std::max(inv.max_hermiticity_error, hermiticity_error(m));
        if (positivity) inv.min_eigenvalue = std::min(inv.min_eigenvalue, min_eigenvalue(m));
        // RK4 keeps the trace exactly even when it diverges, so also bound the
        // entries: a density matrix has |rho_ij| <= 1.
        const double big = max_abs(m);
        if (!(big <= 1.0 + 1e-3)) {
            std::ostringstream msg;
            msg << "state entries reach " << big << " at t = " << t << "; integration is unstable, reduce dt";
            throw IntegrationFailure(msg.str());
        }
        if (!(drift <= tol)) {
            std::ostringstream msg;
            msg << "trace drift " << drift << " at t = " << t << " exceeds " << tol << "; reduce dt";
            throw IntegrationFailure(msg.str());
        }
    }
}

}  // namespace

MERecord evolve_me(const SystemModel& model, const MEOptions& opts) {
    const Dynamics dyn(model, opts.photon);
    const double t_end = std::isnan(opts.t_end) ? model.config.pulse.t_end() : opts.t_end;
    const std::size_t steps = step_count(t_end, opts.dt);
    const std::size_t every = std::max<std::size_t>(1, opts.record_every);

    MERecord rec;
    rec.p_exc.resize(model.n_transmons());
    OdeState x;
    x.m = dyn.initial_state();
    x.s = {0.0};

    Rk4Propagator prop(dyn, opts.dt);
    Matrix work;
    auto rhs = [&](double t, const Generator::Frozen& f, double xi, const OdeState& in, OdeState& out) {
        dyn.apply(f, xi, in.m.data(), out.m.data(), work);
        out.s[0] = dyn.flux(t, in.m.data());
    };

    rec.invariants.min_eigenvalue = 0.0;
    check_invariants(dyn, x, true, opts.trace_tolerance, 0.0, rec.invariants);
    record_sample(dyn, 0.0, x, rec);
    if (opts.observer) opts.observer(0.0, x.m);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * opts.dt;
        prop.step(x, t, rhs);
        const double t1 = static_cast<double>(k + 1) * opts.dt;
        const bool last = k + 1 == steps;
        const bool positivity = opts.positivity_every > 0 && ((k + 1) % opts.positivity_every == 0 || last);
        check_invariants(dyn, x, positivity, opts.trace_tolerance, t1, rec.invariants);
        if ((k + 1) % every == 0 || last) record_sample(dyn, t1, x, rec);
        if (opts.observer) opts.observer(t1, x.m);
    }
    rec.final_blocks = x.m;
    return rec;
}

MERecord evolve_cavity_me(const SystemModel& model, const MEOptions& opts) {
    if (model.is_fock()) throw InvalidInput("evolve_cavity_me needs a cavity-source model");
    return evolve_me(model, opts);
}

MERecord evolve_fock_me(const SystemModel& model, const MEOptions& opts) {
    if (!model.is_fock()) throw InvalidInput("evolve_fock_me needs a Fock-source model");
    return evolve_me(model, opts);
}

void write_trajectory_csv(std::ostream& os, const MERecord& rec) {
    os << "t,y";
    for (std::size_t k = 0; k < rec.p_exc.size(); ++k) os << ",p_exc_" << (k + 1);
    os << ",trace,flux,integrated_flux\n";
    std::vector<double> row;
    for (std::size_t i = 0; i < rec.t.size(); ++i) {
        row.clear();
        row.push_back(rec.t[i]);
        row.push_back(rec.y[i]);
        for (const auto& p : rec.p_exc) row.push_back(p[i]);
        row.push_back(rec.trace[i]);
        row.push_back(rec.flux[i]);
        row.push_back(rec.integrated_flux[i]);
        os << csv_row(row) << '\n';
    }
}

}  // namespace qnd
