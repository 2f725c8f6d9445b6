#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qnd/linalg.hpp"
#include "qnd/slh.hpp"
#include "qnd/system.hpp"

namespace qnd {

/// Numerically compiled master-equation generator
///   L(t) X = K(t) X + X K(t)^dag + sum_j J_j(t) X J_j(t)^dag
/// built from the channel form of an SLH network. Coherent (identity)
/// parts of a channel are folded into the Hamiltonian so the jump operators
/// stay sparse. Envelopes are evaluated once per time point.
class Generator {
public:
    using TimeFunction = std::function<double(double)>;

    /// Evaluated generator at one instant.
    struct Frozen {
        double t = 0.0;
        Matrix K, Kdag;
        std::vector<SparseMatrix> jumps, jumps_dag;
    };

    Generator() = default;
    /// Compiles `network`; every named envelope factor must have a function.
    Generator(const SLHTriplet& network, std::vector<std::pair<std::string, TimeFunction>> factors);
    /// Compiles the model's network; the cavity envelope comes from the pulse.
    explicit Generator(const SystemModel& model);

    std::size_t dim() const { return dim_; }
    std::size_t n_jumps() const { return jumps_.size(); }

    void freeze(double t, Frozen& out) const;
    Frozen freeze(double t) const {
        Frozen f;
        freeze(t, f);
        return f;
    }

    /// out = L X for arbitrary X.
    static void apply(const Frozen& f, const Matrix& x, Matrix& out, Matrix& work);
    /// out = L X assuming X is Hermitian; the result is exactly Hermitian.
    static void apply_hermitian(const Frozen& f, const Matrix& x, Matrix& out, Matrix& work);

private:
    struct DenseTerm {
        std::size_t envelope;
        Matrix op;
    };
    struct SparseTerm {
        std::size_t envelope;
        std::vector<cd> values;  // aligned with the pattern's value array
    };
    struct CompiledJump {
        SparseMatrix pattern, pattern_dag;
        std::vector<SparseTerm> terms, terms_dag;
    };

    std::size_t envelope_index(const Envelope& e);
    void evaluate_envelopes(double t, std::vector<double>& out) const;

    std::size_t dim_ = 0;
    std::vector<std::pair<std::string, TimeFunction>> factors_;
    std::vector<Envelope> envelopes_;
    std::vector<std::vector<std::size_t>> envelope_factors_;
    std::vector<DenseTerm> k_terms_;
    std::vector<CompiledJump> jumps_;
};

/// Time-dependent scalar factors of a model's network (sqrt_kappa for the
/// cavity source, nothing for the Fock source).
std::vector<std::pair<std::string, Generator::TimeFunction>> envelope_factors(const SystemModel& model);

}  // namespace qnd
