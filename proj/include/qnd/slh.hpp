#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "qnd/linalg.hpp"

namespace qnd {

/// A product of named real scalar functions of time. The empty product is
/// the constant 1. Factors are kept sorted so equal products compare equal.
class Envelope {
public:
    Envelope() = default;
    static Envelope named(std::string name);

    Envelope operator*(const Envelope& other) const;
    bool operator==(const Envelope& other) const { return factors_ == other.factors_; }
    bool operator<(const Envelope& other) const { return factors_ < other.factors_; }

    bool is_constant() const { return factors_.empty(); }
    const std::vector<std::string>& factors() const { return factors_; }
    std::string to_string() const;

    /// Evaluates the product given values for every named factor.
    double evaluate(const std::map<std::string, double>& values) const;

private:
    std::vector<std::string> factors_;
};

/// One envelope-weighted operator with a provenance label such as "L01^(2)".
struct OperatorTerm {
    Envelope envelope;
    Matrix op;
    std::string label;
};

/// Ordered sum of envelope-weighted operators. Term order is preserved by
/// the series product (upstream terms first), which is what lets the
/// Liouvillian extraction recover the cascade direction.
class OperatorExpr {
public:
    OperatorExpr() = default;
    explicit OperatorExpr(std::size_t dim) : dim_(dim) {}
    OperatorExpr(Matrix op, std::string label, Envelope envelope = {});

    std::size_t dim() const { return dim_; }
    const std::vector<OperatorTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    OperatorExpr operator+(const OperatorExpr& other) const;
    OperatorExpr operator*(cd scalar) const;
    OperatorExpr adjoint() const;

    /// Pairwise product; labels are joined with '*'.
    friend OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b);

    /// Terms with equal envelopes summed; negligible terms dropped.
    OperatorExpr merged(double tol = 1e-14) const;

    /// Drops terms whose operator is negligible.
    OperatorExpr pruned(double tol = 1e-14) const;

    Matrix evaluate(const std::map<std::string, double>& values) const;

    /// Applies f to every operator (used for subspace projection).
    template <typename F>
    OperatorExpr transformed(F&& f, std::size_t new_dim) const {
        OperatorExpr out(new_dim);
        for (const auto& t : terms_) out.terms_.push_back({t.envelope, f(t.op), t.label});
        return out;
    }

private:
    std::size_t dim_ = 0;
    std::vector<OperatorTerm> terms_;
};

OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b);

/// (S, L, H) description of an open quantum network. Scattering entries are
/// complex scalars multiplying the system identity.
struct SLHTriplet {
    Matrix S;
    std::vector<OperatorExpr> L;
    OperatorExpr H;
    std::size_t system_dim = 0;

    std::size_t n_channels() const { return L.size(); }

    /// Throws InvalidInput when S is not unitary, L has the wrong length,
    /// operators do not act on system_dim, or H is not Hermitian.
    void validate(double tol = 1e-12) const;
};

SLHTriplet identity_triplet(std::size_t channels, std::size_t system_dim);

/// Stacks channels: block-diagonal S, stacked L (g2 first), summed H.
SLHTriplet concatenate(const SLHTriplet& g2, const SLHTriplet& g1);

/// Feeds the outputs of g1 into g2.
SLHTriplet series(const SLHTriplet& g2, const SLHTriplet& g1);

/// Places the channels of `g` at `slots` of an n-channel network; all other
/// channels pass through untouched.
SLHTriplet embed_channels(const SLHTriplet& g, const std::vector<std::size_t>& slots, std::size_t n_total);

/// Single-excitation-free scattering element coupling two channels.
/// Convention used throughout: S = [[t, r], [-r, t]], t = sqrt(1 - r^2).
SLHTriplet beamsplitter_triplet(double r, std::size_t system_dim);

/// One channel carrying a coherent amplitude.
SLHTriplet coherent_triplet(cd alpha, std::size_t system_dim);

/// One channel with coupling operator `sqrt(kappa(t)) a`; the time dependence
/// is carried by the named envelope.
SLHTriplet cavity_triplet(const Matrix& annihilation, const std::string& envelope_name = "sqrt_kappa");

/// One collapse operator on the system with a constant coupling.
SLHTriplet single_channel_triplet(const Matrix& op, const std::string& label);

/// Three-level transmon parameters, rates in units of the first transmon's
/// 0-1 coupling.
struct TransmonParams {
    double gamma_c = 1.0;    ///< 0<->1 waveguide coupling rate
    double gamma_p = 2.0;    ///< 1<->2 waveguide coupling rate
    double delta_c = 0.0;    ///< omega_10 - omega_c
    double delta_p = 0.0;    ///< omega_21 - omega_p
    double gamma_phi = 0.0;  ///< pure dephasing rate

    void validate() const;
};

/// Projectors and transition operators |i><j| of one transmon, already
/// embedded in the system space.
struct TransmonSiteOps {
    Matrix s01, s12, s00, s11, s22;
};

/// Two-channel transmon: S = 1, L = (sqrt(G_c)|0><1|, sqrt(G_p)|1><2|),
/// H = -delta_c |0><0| + delta_p |2><2|. `index` is used for labels only.
SLHTriplet transmon_triplet(const TransmonParams& p, const TransmonSiteOps& ops, std::size_t index);

/// A cascade cross term: contributes -C[upstream][downstream] to the
/// generator with C[c1][c2] rho = [c2^dag, c1 rho] + [rho c1^dag, c2].
struct CouplingTerm {
    OperatorTerm upstream;
    OperatorTerm downstream;
};

/// Master-equation structure extracted from a triplet:
///   rho' = -i[H, rho] + sum D[c] rho - sum C[c1][c2] rho
/// Envelopes are kept factored on every term.
struct LiouvillianSpec {
    std::size_t dim = 0;
    OperatorExpr hamiltonian;
    std::vector<OperatorTerm> dissipators;
    std::vector<CouplingTerm> coupling_terms;

    /// Applies the generator to `x` with envelopes evaluated from `values`.
    Matrix apply(const Matrix& x, const std::map<std::string, double>& values) const;

    bool empty(double tol = 1e-14) const;
};

LiouvillianSpec to_liouvillian(const SLHTriplet& g);

/// D[c] rho = c rho c^dag - (c^dag c rho + rho c^dag c) / 2
Matrix lindblad_dissipator(const Matrix& c, const Matrix& rho);

/// C[c1][c2] rho = [c2^dag, c1 rho] + [rho c1^dag, c2]
Matrix cascade_coupling(const Matrix& c1, const Matrix& c2, const Matrix& rho);

}  // namespace qnd
