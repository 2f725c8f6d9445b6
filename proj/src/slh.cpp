#include "qnd/slh.hpp"

#include <algorithm>
#include <cmath>

namespace qnd {

// ---------------------------------------------------------------- Envelope

Envelope Envelope::named(std::string name) {
    Envelope e;
    e.factors_.push_back(std::move(name));
    return e;
}

Envelope Envelope::operator*(const Envelope& other) const {
    Envelope e;
    e.factors_ = factors_;
    e.factors_.insert(e.factors_.end(), other.factors_.begin(), other.factors_.end());
    std::sort(e.factors_.begin(), e.factors_.end());
    return e;
}

std::string Envelope::to_string() const {
    if (factors_.empty()) return "1";
    std::string s;
    for (const auto& f : factors_) {
        if (!s.empty()) s += "*";
        s += f;
    }
    return s;
}

double Envelope::evaluate(const std::map<std::string, double>& values) const {
    double v = 1.0;
    for (const auto& f : factors_) {
        auto it = values.find(f);
        if (it == values.end()) throw InvalidInput("no value supplied for envelope '" + f + "'");
        v *= it->second;
    }
    return v;
}

// ------------------------------------------------------------ OperatorExpr

OperatorExpr::OperatorExpr(Matrix op, std::string label, Envelope envelope)
    : dim_(static_cast<std::size_t>(op.rows())) {
    if (op.rows() != op.cols()) throw InvalidInput("operator must be square");
    terms_.push_back({std::move(envelope), std::move(op), std::move(label)});
}

OperatorExpr OperatorExpr::operator+(const OperatorExpr& other) const {
    if (dim_ != other.dim_) throw InvalidInput("operator dimension mismatch in sum");
    OperatorExpr out = *this;
    out.terms_.insert(out.terms_.end(), other.terms_.begin(), other.terms_.end());
    return out;
}

OperatorExpr OperatorExpr::operator*(cd scalar) const {
    OperatorExpr out(dim_);
    if (scalar == cd{0.0, 0.0}) return out;
    for (const auto& t : terms_) out.terms_.push_back({t.envelope, scalar * t.op, t.label});
    return out;
}

OperatorExpr OperatorExpr::adjoint() const {
    OperatorExpr out(dim_);
    for (const auto& t : terms_) out.terms_.push_back({t.envelope, t.op.adjoint(), t.label + "^dag"});
    return out;
}

OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b) {
    if (a.dim_ != b.dim_) throw InvalidInput("operator dimension mismatch in product");
    OperatorExpr out(a.dim_);
    for (const auto& ta : a.terms_) {
        for (const auto& tb : b.terms_) {
            out.terms_.push_back({ta.envelope * tb.envelope, ta.op * tb.op, ta.label + "*" + tb.label});
        }
    }
    return out;
}

OperatorExpr OperatorExpr::merged(double tol) const {
    std::map<Envelope, Matrix> groups;
    std::vector<Envelope> order;
    for (const auto& t : terms_) {
        auto it = groups.find(t.envelope);
        if (it == groups.end()) {
            groups.emplace(t.envelope, t.op);
            order.push_back(t.envelope);
        } else {
            it->second += t.op;
        }
    }
    OperatorExpr out(dim_);
    for (const auto& env : order) {
        const Matrix& m = groups.at(env);
        if (max_abs(m) > tol) out.terms_.push_back({env, m, env.is_constant() ? "H" : "H[" + env.to_string() + "]"});
    }
    return out;
}

OperatorExpr OperatorExpr::pruned(double tol) const {
    OperatorExpr out(dim_);
    for (const auto& t : terms_) {
        if (max_abs(t.op) > tol) out.terms_.push_back(t);
    }
    return out;
}

Matrix OperatorExpr::evaluate(const std::map<std::string, double>& values) const {
    const auto d = static_cast<Eigen::Index>(dim_);
    Matrix m = Matrix::Zero(d, d);
    for (const auto& t : terms_) m += t.envelope.evaluate(values) * t.op;
    return m;
}

// -------------------------------------------------------------- SLHTriplet

void SLHTriplet::validate(double tol) const {
    const auto n = static_cast<Eigen::Index>(L.size());
    if (S.rows() != n || S.cols() != n) throw InvalidInput("scattering matrix size does not match channel count");
    if (max_abs(S * S.adjoint() - Matrix::Identity(n, n)) > tol) {
        throw InvalidInput("scattering matrix is not unitary");
    }
    for (const auto& l : L) {
        if (l.dim() != system_dim) throw InvalidInput("coupling operator does not act on the system space");
    }
    if (H.dim() != system_dim) throw InvalidInput("Hamiltonian does not act on the system space");
    for (const auto& t : H.merged(0.0).terms()) {
        if (hermiticity_error(t.op) > tol) throw InvalidInput("Hamiltonian is not Hermitian");
    }
}

SLHTriplet identity_triplet(std::size_t channels, std::size_t system_dim) {
    if (channels == 0) throw InvalidInput("identity triplet needs at least one channel");
    SLHTriplet g;
    const auto n = static_cast<Eigen::Index>(channels);
    g.S = Matrix::Identity(n, n);
    g.L.assign(channels, OperatorExpr(system_dim));
    g.H = OperatorExpr(system_dim);
    g.system_dim = system_dim;
    return g;
}

SLHTriplet concatenate(const SLHTriplet& g2, const SLHTriplet& g1) {
    if (g2.system_dim != g1.system_dim) throw InvalidInput("concatenation of triplets on different system spaces");
    SLHTriplet g;
    g.system_dim = g1.system_dim;
    const auto n2 = g2.S.rows();
    const auto n1 = g1.S.rows();
    g.S = Matrix::Zero(n1 + n2, n1 + n2);
    g.S.topLeftCorner(n2, n2) = g2.S;
    g.S.bottomRightCorner(n1, n1) = g1.S;
    g.L = g2.L;
    g.L.insert(g.L.end(), g1.L.begin(), g1.L.end());
    g.H = g2.H + g1.H;
    return g;
}

SLHTriplet series(const SLHTriplet& g2, const SLHTriplet& g1) {
    if (g2.system_dim != g1.system_dim) throw InvalidInput("series product of triplets on different system spaces");
    if (g2.n_channels() != g1.n_channels()) throw InvalidInput("series product requires equal channel counts");
    const std::size_t n = g1.n_channels();
    const std::size_t dim = g1.system_dim;

    SLHTriplet g;
    g.system_dim = dim;
    g.S = g2.S * g1.S;

    g.L.assign(n, OperatorExpr(dim));
    for (std::size_t i = 0; i < n; ++i) {
        OperatorExpr li(dim);
        for (std::size_t j = 0; j < n; ++j) {
            li = li + g1.L[j] * g2.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        g.L[i] = li + g2.L[i];
    }

    // (1/2i)(L2^dag S2 L1 - L1^dag S2^dag L2)
    OperatorExpr cross(dim);
    const cd half_over_i = 1.0 / (2.0 * kI);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const cd s = g2.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (s == cd{0.0, 0.0}) continue;
            cross = cross + (g2.L[i].adjoint() * g1.L[j]) * (half_over_i * s);
            cross = cross + (g1.L[j].adjoint() * g2.L[i]) * (-half_over_i * std::conj(s));
        }
    }
    g.H = (g1.H + g2.H + cross).merged();
    return g;
}

SLHTriplet embed_channels(const SLHTriplet& g, const std::vector<std::size_t>& slots, std::size_t n_total) {
    if (slots.size() != g.n_channels()) throw InvalidInput("slot list does not match channel count");
    SLHTriplet out = identity_triplet(n_total, g.system_dim);
    for (std::size_t a = 0; a < slots.size(); ++a) {
        if (slots[a] >= n_total) throw InvalidInput("channel slot out of range");
        for (std::size_t b = a + 1; b < slots.size(); ++b) {
            if (slots[a] == slots[b]) throw InvalidInput("duplicate channel slot");
        }
    }
    for (std::size_t a = 0; a < slots.size(); ++a) {
        const auto ia = static_cast<Eigen::Index>(slots[a]);
        out.S(ia, ia) = 0.0;
    }
    for (std::size_t a = 0; a < slots.size(); ++a) {
        for (std::size_t b = 0; b < slots.size(); ++b) {
            out.S(static_cast<Eigen::Index>(slots[a]), static_cast<Eigen::Index>(slots[b])) =
                g.S(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
        out.L[slots[a]] = g.L[a];
    }
    out.H = g.H;
    return out;
}

SLHTriplet beamsplitter_triplet(double r, std::size_t system_dim) {
    if (!(r >= 0.0) || r >= 1.0) throw InvalidInput("beamsplitter reflection amplitude must lie in [0, 1)");
    SLHTriplet g = identity_triplet(2, system_dim);
    const double t = std::sqrt(1.0 - r * r);
    g.S << t, r, -r, t;
    return g;
}

SLHTriplet coherent_triplet(cd alpha, std::size_t system_dim) {
    SLHTriplet g = identity_triplet(1, system_dim);
    const auto d = static_cast<Eigen::Index>(system_dim);
    g.L[0] = OperatorExpr(Matrix(alpha * Matrix::Identity(d, d)), "alpha_p");
    return g;
}

SLHTriplet cavity_triplet(const Matrix& annihilation, const std::string& envelope_name) {
    SLHTriplet g = identity_triplet(1, static_cast<std::size_t>(annihilation.rows()));
    g.L[0] = OperatorExpr(annihilation, "a", Envelope::named(envelope_name));
    return g;
}

SLHTriplet single_channel_triplet(const Matrix& op, const std::string& label) {
    SLHTriplet g = identity_triplet(1, static_cast<std::size_t>(op.rows()));
    g.L[0] = OperatorExpr(op, label);
    return g;
}

void TransmonParams::validate() const {
    if (!(gamma_c > 0.0)) throw InvalidInput("transmon gamma_c must be positive");
    if (!(gamma_p >= 0.0)) throw InvalidInput("transmon gamma_p must be non-negative");
    if (!(gamma_phi >= 0.0)) throw InvalidInput("transmon dephasing rate must be non-negative");
    if (!std::isfinite(delta_c) || !std::isfinite(delta_p)) throw InvalidInput("transmon detunings must be finite");
}

SLHTriplet transmon_triplet(const TransmonParams& p, const TransmonSiteOps& ops, std::size_t index) {
    p.validate();
    const std::size_t dim = static_cast<std::size_t>(ops.s01.rows());
    SLHTriplet g = identity_triplet(2, dim);
    const std::string tag = "^(" + std::to_string(index) + ")";
    g.L[0] = OperatorExpr(Matrix(std::sqrt(p.gamma_c) * ops.s01), "L01" + tag);
    g.L[1] = OperatorExpr(Matrix(std::sqrt(p.gamma_p) * ops.s12), "L12" + tag);
    g.H = OperatorExpr(Matrix(-p.delta_c * ops.s00 + p.delta_p * ops.s22), "H_tr" + tag).pruned();
    return g;
}

// --------------------------------------------------------- LiouvillianSpec

Matrix lindblad_dissipator(const Matrix& c, const Matrix& rho) {
    const Matrix cdc = c.adjoint() * c;
    return c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
}

Matrix cascade_coupling(const Matrix& c1, const Matrix& c2, const Matrix& rho) {
    const Matrix c1rho = c1 * rho;
    const Matrix rhoc1d = rho * c1.adjoint();
    return commutator(c2.adjoint(), c1rho) + commutator(rhoc1d, c2);
}

namespace {

// Returns true and sets `value` when op is (numerically) value * identity.
bool scalar_identity(const Matrix& op, cd& value, double tol = 1e-14) {
    if (op.rows() == 0) return false;
    value = op(0, 0);
    const Matrix diff = op - value * Matrix::Identity(op.rows(), op.cols());
    return max_abs(diff) <= tol;
}

}  // namespace

LiouvillianSpec to_liouvillian(const SLHTriplet& g) {
    LiouvillianSpec spec;
    spec.dim = g.system_dim;
    OperatorExpr h = g.H;
    const cd half_over_i = 1.0 / (2.0 * kI);

    for (const auto& channel : g.L) {
        const auto terms = channel.pruned().terms();
        std::vector<bool> is_scalar(terms.size());
        std::vector<cd> scalar(terms.size());
        for (std::size_t a = 0; a < terms.size(); ++a) {
            is_scalar[a] = scalar_identity(terms[a].op, scalar[a]);
            if (!is_scalar[a]) {
                spec.dissipators.push_back({terms[a].envelope * terms[a].envelope, terms[a].op, terms[a].label});
            }
        }
        for (std::size_t a = 0; a < terms.size(); ++a) {
            for (std::size_t b = a + 1; b < terms.size(); ++b) {
                const Envelope env = terms[a].envelope * terms[b].envelope;
                if (is_scalar[a] && is_scalar[b]) continue;
                if (is_scalar[a] || is_scalar[b]) {
                    // D[beta + c] cross part is the drive -i[(i/2)(beta* c - beta c^dag), rho].
                    const cd beta = is_scalar[a] ? scalar[a] : scalar[b];
                    const Matrix& c = is_scalar[a] ? terms[b].op : terms[a].op;
                    const Matrix drive = 0.5 * kI * (std::conj(beta) * c - beta * c.adjoint());
                    h = h + OperatorExpr(drive, "drive", env);
                    continue;
                }
                const Matrix& ca = terms[a].op;
                const Matrix& cb = terms[b].op;
                const Matrix hab = half_over_i * (cb.adjoint() * ca - ca.adjoint() * cb);
                h = h + OperatorExpr(Matrix(-hab), "cascade", env);
                spec.coupling_terms.push_back({{env, ca, terms[a].label}, {Envelope{}, cb, terms[b].label}});
            }
        }
    }
    spec.hamiltonian = h.merged(1e-13);
    return spec;
}

Matrix LiouvillianSpec::apply(const Matrix& x, const std::map<std::string, double>& values) const {
    const Matrix hm = hamiltonian.evaluate(values);
    Matrix out = -kI * commutator(hm, x);
    for (const auto& d : dissipators) {
        out += d.envelope.evaluate(values) * lindblad_dissipator(d.op, x);
    }
    for (const auto& c : coupling_terms) {
        const double e = c.upstream.envelope.evaluate(values) * c.downstream.envelope.evaluate(values);
        out -= e * cascade_coupling(c.upstream.op, c.downstream.op, x);
    }
    return out;
}

bool LiouvillianSpec::empty(double tol) const {
    if (!dissipators.empty() || !coupling_terms.empty()) return false;
    for (const auto& t : hamiltonian.terms()) {
        if (max_abs(t.op) > tol) return false;
    }
    return true;
}

}  // namespace qnd
