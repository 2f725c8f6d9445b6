#include "qnd/generator.hpp"

#include <algorithm>
#include <map>

namespace qnd {

namespace {

bool is_scalar_identity(const Matrix& op, cd& value) {
    value = op(0, 0);
    return max_abs(op - value * Matrix::Identity(op.rows(), op.cols())) <= 1e-14;
}

// Maps (row, col) to the position in the pattern's compressed value array.
std::map<std::pair<Eigen::Index, Eigen::Index>, Eigen::Index> value_positions(const SparseMatrix& pattern) {
    std::map<std::pair<Eigen::Index, Eigen::Index>, Eigen::Index> pos;
    Eigen::Index k = 0;
    for (Eigen::Index outer = 0; outer < pattern.outerSize(); ++outer) {
        for (SparseMatrix::InnerIterator it(pattern, outer); it; ++it) pos[{it.row(), it.col()}] = k++;
    }
    return pos;
}

}  // namespace

std::vector<std::pair<std::string, Generator::TimeFunction>> envelope_factors(const SystemModel& model) {
    std::vector<std::pair<std::string, Generator::TimeFunction>> f;
    if (!model.is_fock()) {
        const PulseShape pulse = model.config.pulse;
        f.emplace_back("sqrt_kappa", [pulse](double t) { return pulse.sqrt_kappa(t); });
    }
    return f;
}

Generator::Generator(const SystemModel& model) : Generator(model.network, envelope_factors(model)) {}

std::size_t Generator::envelope_index(const Envelope& e) {
    for (std::size_t i = 0; i < envelopes_.size(); ++i) {
        if (envelopes_[i] == e) return i;
    }
    std::vector<std::size_t> idx;
    for (const auto& name : e.factors()) {
        auto it = std::find_if(factors_.begin(), factors_.end(), [&](const auto& p) { return p.first == name; });
        if (it == factors_.end()) throw InvalidInput("no time function for envelope factor '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - factors_.begin()));
    }
    envelopes_.push_back(e);
    envelope_factors_.push_back(std::move(idx));
    return envelopes_.size() - 1;
}

Generator::Generator(const SLHTriplet& network, std::vector<std::pair<std::string, TimeFunction>> factors)
    : dim_(network.system_dim), factors_(std::move(factors)) {
    const auto d = static_cast<Eigen::Index>(dim_);
    std::map<std::size_t, Matrix> k_acc;
    auto add_k = [&](const Envelope& e, const Matrix& m) {
        const std::size_t idx = envelope_index(e);
        auto it = k_acc.find(idx);
        if (it == k_acc.end()) {
            k_acc.emplace(idx, m);
        } else {
            it->second += m;
        }
    };

    for (const auto& t : network.H.terms()) add_k(t.envelope, -kI * t.op);

    for (const auto& channel : network.L) {
        std::vector<std::pair<Envelope, cd>> scalars;
        std::vector<std::pair<Envelope, Matrix>> ops;
        const OperatorExpr pruned = channel.pruned();
        for (const auto& t : pruned.terms()) {
            cd beta;
            if (is_scalar_identity(t.op, beta)) {
                scalars.emplace_back(t.envelope, beta);
            } else {
                ops.emplace_back(t.envelope, t.op);
            }
        }
        // D[beta + c] = D[c] - i[(i/2)(beta* c - beta c^dag), .]
        for (const auto& [se, beta] : scalars) {
            for (const auto& [ce, c] : ops) {
                add_k(se * ce, 0.5 * (std::conj(beta) * c - beta * c.adjoint()));
            }
        }
        for (const auto& [ea, a] : ops) {
            for (const auto& [eb, b] : ops) add_k(ea * eb, -0.5 * a.adjoint() * b);
        }
        if (ops.empty()) continue;

        CompiledJump jump;
        auto build = [&](bool adjoint, SparseMatrix& pattern, std::vector<SparseTerm>& terms) {
            std::vector<Eigen::Triplet<cd>> ones;
            std::vector<SparseMatrix> parts;
            for (const auto& [e, op] : ops) {
                parts.push_back(to_sparse(adjoint ? Matrix(op.adjoint()) : op));
                for (Eigen::Index o = 0; o < parts.back().outerSize(); ++o) {
                    for (SparseMatrix::InnerIterator it(parts.back(), o); it; ++it) ones.emplace_back(it.row(), it.col(), 1.0);
                }
            }
            pattern = SparseMatrix(d, d);
            pattern.setFromTriplets(ones.begin(), ones.end());
            pattern.makeCompressed();
            const auto pos = value_positions(pattern);
            for (std::size_t i = 0; i < ops.size(); ++i) {
                SparseTerm term{envelope_index(ops[i].first), std::vector<cd>(static_cast<std::size_t>(pattern.nonZeros()))};
                for (Eigen::Index o = 0; o < parts[i].outerSize(); ++o) {
                    for (SparseMatrix::InnerIterator it(parts[i], o); it; ++it) {
                        term.values[static_cast<std::size_t>(pos.at({it.row(), it.col()}))] += it.value();
                    }
                }
                terms.push_back(std::move(term));
            }
        };
        build(false, jump.pattern, jump.terms);
        build(true, jump.pattern_dag, jump.terms_dag);
        jumps_.push_back(std::move(jump));
    }

    for (auto& [idx, m] : k_acc) k_terms_.push_back({idx, std::move(m)});
    if (k_terms_.empty()) k_terms_.push_back({envelope_index(Envelope{}), Matrix::Zero(d, d)});
}

void Generator::evaluate_envelopes(double t, std::vector<double>& out) const {
    std::vector<double> factor_values(factors_.size());
    for (std::size_t i = 0; i < factors_.size(); ++i) factor_values[i] = factors_[i].second(t);
    out.assign(envelopes_.size(), 1.0);
    for (std::size_t e = 0; e < envelopes_.size(); ++e) {
        for (auto f : envelope_factors_[e]) out[e] *= factor_values[f];
    }
}

void Generator::freeze(double t, Frozen& out) const {
    std::vector<double> env;
    evaluate_envelopes(t, env);
    out.t = t;
    const auto d = static_cast<Eigen::Index>(dim_);
    out.K.setZero(d, d);
    for (const auto& term : k_terms_) {
        const double e = env[term.envelope];
        if (e != 0.0) out.K += e * term.op;
    }
    out.Kdag = out.K.adjoint();
    if (out.jumps.size() != jumps_.size()) {
        out.jumps.clear();
        out.jumps_dag.clear();
        for (const auto& j : jumps_) {
            out.jumps.push_back(j.pattern);
            out.jumps_dag.push_back(j.pattern_dag);
        }
    }
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
        auto fill = [&](SparseMatrix& target, const std::vector<SparseTerm>& terms) {
            cd* v = target.valuePtr();
            const auto nnz = static_cast<std::size_t>(target.nonZeros());
            std::fill(v, v + nnz, cd{0.0, 0.0});
            for (const auto& term : terms) {
                const double e = env[term.envelope];
                if (e == 0.0) continue;
                for (std::size_t k = 0; k < nnz; ++k) v[k] += e * term.values[k];
            }
        };
        fill(out.jumps[j], jumps_[j].terms);
        fill(out.jumps_dag[j], jumps_[j].terms_dag);
    }
}

void Generator::apply(const Frozen& f, const Matrix& x, Matrix& out, Matrix& work) {
    out.noalias() = f.K * x;
    out.noalias() += x * f.Kdag;
    for (std::size_t j = 0; j < f.jumps.size(); ++j) {
        work.noalias() = f.jumps[j] * x;
        out.noalias() += work * f.jumps_dag[j];
    }
}

void Generator::apply_hermitian(const Frozen& f, const Matrix& x, Matrix& out, Matrix& work) {
    work.noalias() = f.K * x;
    out = work + work.adjoint();
    for (std::size_t j = 0; j < f.jumps.size(); ++j) {
        work.noalias() = f.jumps[j] * x;
        out.noalias() += work * f.jumps_dag[j];
    }
}

}  // namespace qnd
