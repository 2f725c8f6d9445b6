#include "qnd/sme_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "qnd/io.hpp"
#include "qnd/me_engine.hpp"
#include "qnd/rng.hpp"

namespace qnd {

namespace {

// Everything shared by the trajectories of one batch.
class TrajectoryRunner {
public:
    TrajectoryRunner(const SystemModel& model, bool photon, const SMEOptions& opts)
        : dyn_(model, photon), opts_(opts), photon_(photon) {
        double t_end = opts.t_end;
        if (std::isnan(t_end)) {
            t_end = 0.0;
            for (const auto& f : opts.filters) t_end = std::max(t_end, f.t_f);
            if (opts.filters.empty()) t_end = model.config.pulse.t_end();
        }
        steps_ = step_count(t_end, opts.dt);
        weights_.resize(opts.filters.size());
        for (std::size_t i = 0; i < opts.filters.size(); ++i) {
            const auto& f = opts.filters[i];
            f.validate();
            weights_[i].resize(steps_);
            for (std::size_t k = 0; k < steps_; ++k) weights_[i][k] = f.weight(static_cast<double>(k) * opts.dt);
        }
        c_ = to_sparse(model.measurement_op, 1e-15);
        cdag_ = to_sparse(Matrix(model.measurement_op.adjoint()), 1e-15);
        phase_ = std::exp(kI * model.config.phi);
        seta_ = std::sqrt(model.config.eta);
        noise_only_ = !photon && opts.vacuum_shortcut && ground_state_stationary(model, t_end);
    }

    HomodyneRecord run(std::uint64_t seed) const {
        const auto& model = dyn_.model();
        const double dt = opts_.dt;
        const double sdt = std::sqrt(dt);
        HomodyneRecord rec;
        rec.seed = seed;
        rec.dt = dt;
        rec.photons = photon_ ? 1 : 0;
        rec.eta = model.config.eta;
        rec.phi = model.config.phi;
        rec.signals.assign(weights_.size(), 0.0);
        if (opts_.keep_samples) rec.j.reserve(steps_);
        if (opts_.keep_conditioned_y) rec.conditioned_y.reserve(steps_);

        NormalStream noise(seed, photon_ ? 1u : 0u);
        auto emit = [&](std::size_t k, double y, double dw) {
            const double j = seta_ * y + dw / dt;
            for (std::size_t i = 0; i < weights_.size(); ++i) rec.signals[i] += weights_[i][k] * j * dt;
            if (opts_.keep_samples) rec.j.push_back(j);
            if (opts_.keep_conditioned_y) rec.conditioned_y.push_back(y);
        };

        if (noise_only_) {
            for (std::size_t k = 0; k < steps_; ++k) emit(k, 0.0, sdt * noise.next());
            return rec;
        }

        const std::size_t nb = dyn_.blocks();
        const std::size_t top = dyn_.top_block();
        std::vector<Matrix> x = dyn_.initial_state();
        std::vector<Matrix> lx(nb);
        Matrix work, cx, meas;
        Generator::Frozen f;
        for (std::size_t k = 0; k < steps_; ++k) {
            const double t = static_cast<double>(k) * dt;
            dyn_.generator().freeze(t, f);
            const double y = trace_product(x[top], model.y_op).real();
            const double dw = sdt * noise.next();
            emit(k, y, dw);

            dyn_.apply(f, dyn_.xi(t), x.data(), lx.data(), work);
            const double b = seta_ * dw;
            for (std::size_t i = 0; i < nb; ++i) {
                cx.noalias() = phase_ * (c_ * x[i]);
                const bool hermitian = !(dyn_.fock() && i == 1);
                if (hermitian) {
                    meas = cx + cx.adjoint();
                } else {
                    work.noalias() = std::conj(phase_) * (x[i] * cdag_);
                    meas = cx + work;
                }
                meas -= y * x[i];
                x[i] += dt * lx[i] + b * meas;
            }

            const cd tr = x[top].trace();
            if (!std::isfinite(tr.real()) || std::abs(tr - cd{1.0, 0.0}) > opts_.trace_tolerance) {
                rec.valid = false;
                return rec;
            }
            for (auto& m : x) m /= tr.real();
            x[0] = 0.5 * (x[0] + x[0].adjoint()).eval();
            if (top != 0) x[top] = 0.5 * (x[top] + x[top].adjoint()).eval();
        }
        return rec;
    }

private:
    Dynamics dyn_;
    SMEOptions opts_;
    bool photon_;
    std::size_t steps_ = 0;
    std::vector<std::vector<double>> weights_;
    SparseMatrix c_, cdag_;
    cd phase_;
    double seta_ = 1.0;
    bool noise_only_ = false;
};

}  // namespace

HomodyneRecord simulate_trajectory(const SystemModel& model, bool photon, std::uint64_t seed, const SMEOptions& opts) {
    return TrajectoryRunner(model, photon, opts).run(seed);
}

BatchResult run_batch(const SystemModel& model, bool photon, std::size_t n_traj, std::uint64_t seed0,
                      const SMEOptions& opts, std::size_t workers) {
    if (n_traj == 0) throw InvalidInput("batch needs at least one trajectory");
    const TrajectoryRunner runner(model, photon, opts);
    BatchResult out;
    out.records.resize(n_traj);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n_traj);

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < n_traj; i = next++) out.records[i] = runner.run(seed0 + i);
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (const auto& r : out.records) out.invalid += r.valid ? 0 : 1;
    return out;
}

std::vector<double> batch_signals(const BatchResult& batch, std::size_t index) {
    std::vector<double> s;
    s.reserve(batch.records.size());
    for (const auto& r : batch.records) {
        if (!r.valid) continue;
        if (index >= r.signals.size()) throw InvalidInput("filter index out of range");
        s.push_back(r.signals[index]);
    }
    return s;
}

void write_record_csv(std::ostream& os, const HomodyneRecord& rec) {
    os << "t,j\n";
    for (std::size_t k = 0; k < rec.j.size(); ++k) os << csv_row({static_cast<double>(k) * rec.dt, rec.j[k]}) << '\n';
}

}  // namespace qnd
