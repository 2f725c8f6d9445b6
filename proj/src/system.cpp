#include "qnd/system.hpp"

#include <cmath>

namespace qnd {

std::string to_string(SourceKind kind) { return kind == SourceKind::cavity ? "cavity" : "fock"; }

SourceKind source_kind_from_string(const std::string& name) {
    if (name == "cavity") return SourceKind::cavity;
    if (name == "fock") return SourceKind::fock;
    throw InvalidInput("unknown source '" + name + "' (expected cavity or fock)");
}

void ChainConfig::validate() const {
    if (transmons.empty()) throw InvalidInput("chain needs at least one transmon");
    for (const auto& t : transmons) t.validate();
    if (!(probe_amplitude >= 0.0) || !std::isfinite(probe_amplitude)) throw InvalidInput("probe amplitude must be >= 0");
    if (!(p_loss >= 0.0) || p_loss >= 1.0) throw InvalidInput("p_loss must lie in [0, 1)");
    if (!(eta >= 0.0) || eta > 1.0) throw InvalidInput("eta must lie in [0, 1]");
    if (!std::isfinite(phi)) throw InvalidInput("local oscillator phase must be finite");
    if (source == SourceKind::fock && p_loss > 0.0) {
        throw InvalidInput("circulator loss is modelled with the cavity source only");
    }
    if (representation == Representation::full && transmons.size() > 5) {
        throw InvalidInput("full tensor representation is limited to 5 transmons");
    }
}

std::size_t sector_dimension(SourceKind source, std::size_t n_transmons) {
    return (source == SourceKind::cavity ? 2 : 1) + 2 * n_transmons;
}

namespace {

HilbertLayout make_layout(SourceKind source, std::size_t n) {
    std::vector<HilbertLayout::Factor> factors;
    if (source == SourceKind::cavity) factors.push_back({"cavity", 2});
    for (std::size_t k = 0; k < n; ++k) factors.push_back({"transmon" + std::to_string(k + 1), 3});
    return HilbertLayout(std::move(factors));
}

// Ordered as: [cavity photon], vacuum, then |1_k>, |2_k> for each transmon.
std::vector<std::size_t> sector_basis(const HilbertLayout& layout, SourceKind source, std::size_t n) {
    const std::size_t offset = source == SourceKind::cavity ? 1 : 0;
    std::vector<std::size_t> basis;
    std::vector<std::size_t> levels(layout.num_factors(), 0);
    if (source == SourceKind::cavity) {
        levels[0] = 1;
        basis.push_back(layout.index_of(levels));
        levels[0] = 0;
    }
    basis.push_back(layout.index_of(levels));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t lvl : {1u, 2u}) {
            levels[offset + k] = lvl;
            basis.push_back(layout.index_of(levels));
        }
        levels[offset + k] = 0;
    }
    return basis;
}

Matrix project_local(const HilbertLayout& layout, const SubspaceEncoding& enc, const Matrix& local, std::size_t factor) {
    const auto n = static_cast<Eigen::Index>(enc.dim());
    Matrix out = Matrix::Zero(n, n);
    std::vector<std::vector<std::size_t>> levels;
    levels.reserve(enc.dim());
    for (auto b : enc.basis()) levels.push_back(layout.levels_of(b));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& li = levels[static_cast<std::size_t>(i)];
            const auto& lj = levels[static_cast<std::size_t>(j)];
            bool same = true;
            for (std::size_t f = 0; f < li.size() && same; ++f) {
                if (f != factor && li[f] != lj[f]) same = false;
            }
            if (same) out(i, j) = local(static_cast<Eigen::Index>(li[factor]), static_cast<Eigen::Index>(lj[factor]));
        }
    }
    return out;
}

Matrix non_scalar_part(const OperatorExpr& channel, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& t : channel.terms()) {
        const cd v = t.op(0, 0);
        const bool scalar = max_abs(t.op - v * Matrix::Identity(d, d)) <= 1e-14;
        if (scalar) continue;
        if (!t.envelope.is_constant()) continue;
        sum += t.op;
    }
    return sum;
}

SLHTriplet append_dephasing(SLHTriplet g, const std::vector<TransmonSiteOps>& sites, const std::vector<double>& rates) {
    for (std::size_t k = 0; k < sites.size() && k < rates.size(); ++k) {
        if (rates[k] < 0.0) throw InvalidInput("dephasing rate must be non-negative");
        if (rates[k] == 0.0) continue;
        const Matrix op = std::sqrt(rates[k] / 2.0) * (2.0 * sites[k].s11 + 4.0 * sites[k].s22);
        g = concatenate(g, single_channel_triplet(op, "deph^(" + std::to_string(k + 1) + ")"));
    }
    return g;
}

void derive_operators(SystemModel& m) {
    const auto& cfg = m.config;
    m.lambda01 = collective_operator(m, Transition::t01);
    m.lambda12 = collective_operator(m, Transition::t12);
    m.measurement_op = non_scalar_part(m.network.L.at(1), m.dim);
    const cd phase = std::exp(kI * cfg.phi);
    m.y_op = phase * m.measurement_op + std::conj(phase) * m.measurement_op.adjoint();
    m.input_coupling = non_scalar_part(m.network.L.at(0), m.dim);
    m.excitation_projectors.clear();
    for (const auto& s : m.sites) m.excitation_projectors.push_back(s.s11 + s.s22);
}

}  // namespace

SystemModel build_chain(const ChainConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_transmons();
    const bool cavity = cfg.source == SourceKind::cavity;

    SystemModel m;
    m.config = cfg;
    m.layout = make_layout(cfg.source, n);
    const auto basis = sector_basis(m.layout, cfg.source, n);
    if (cfg.representation == Representation::reduced) {
        m.subspace = SubspaceEncoding(m.layout.dim(), basis);
        m.dim = m.subspace->dim();
    } else {
        m.dim = m.layout.dim();
    }
    auto embed = [&](const Matrix& local, std::size_t factor) -> Matrix {
        if (m.subspace) return project_local(m.layout, *m.subspace, local, factor);
        return m.layout.embed(local, factor);
    };

    const std::size_t offset = cavity ? 1 : 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t f = offset + k;
        m.sites.push_back({embed(outer(3, 0, 1), f), embed(outer(3, 1, 2), f), embed(outer(3, 0, 0), f),
                           embed(outer(3, 1, 1), f), embed(outer(3, 2, 2), f)});
    }

    const cd alpha = kI * cfg.probe_amplitude;
    SLHTriplet g;
    if (cavity) {
        m.cavity_annihilation = embed(outer(2, 0, 1), 0);
        g = concatenate(cavity_triplet(m.cavity_annihilation), coherent_triplet(alpha, m.dim));
    } else {
        g = concatenate(identity_triplet(1, m.dim), coherent_triplet(alpha, m.dim));
    }

    const double r = std::sqrt(cfg.p_loss);
    for (std::size_t k = 0; k < n; ++k) {
        if (cfg.p_loss > 0.0) {
            // Each circulator attenuates both the control and the probe line.
            const std::size_t nch = g.n_channels();
            g = concatenate(g, identity_triplet(2, m.dim));
            const SLHTriplet bs = beamsplitter_triplet(r, m.dim);
            g = series(embed_channels(bs, {0, nch}, nch + 2), g);
            g = series(embed_channels(bs, {1, nch + 1}, nch + 2), g);
        }
        const SLHTriplet tr = transmon_triplet(cfg.transmons[k], m.sites[k], k + 1);
        g = series(embed_channels(tr, {0, 1}, g.n_channels()), g);
    }

    std::vector<double> rates;
    for (const auto& t : cfg.transmons) rates.push_back(t.gamma_phi);
    g = append_dephasing(std::move(g), m.sites, rates);

    m.network = std::move(g);
    m.liouvillian = to_liouvillian(m.network);

    const auto d = static_cast<Eigen::Index>(m.dim);
    std::vector<std::size_t> ground_levels(m.layout.num_factors(), 0);
    auto basis_state = [&](std::size_t full_index) {
        Matrix rho = Matrix::Zero(d, d);
        if (m.subspace) {
            const auto& b = m.subspace->basis();
            for (std::size_t i = 0; i < b.size(); ++i) {
                if (b[i] == full_index) rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
            }
        } else {
            rho(static_cast<Eigen::Index>(full_index), static_cast<Eigen::Index>(full_index)) = 1.0;
        }
        return rho;
    };
    m.ground_state = basis_state(m.layout.index_of(ground_levels));
    if (cavity) {
        auto photon_levels = ground_levels;
        photon_levels[0] = 1;
        m.photon_state = basis_state(m.layout.index_of(photon_levels));
    } else {
        m.photon_state = m.ground_state;
    }
    derive_operators(m);
    return m;
}

Matrix collective_operator(const SystemModel& model, Transition ij) {
    const auto d = static_cast<Eigen::Index>(model.dim);
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < model.sites.size(); ++k) {
        const auto& p = model.config.transmons[k];
        if (ij == Transition::t01) {
            sum += std::sqrt(p.gamma_c) * model.sites[k].s01;
        } else {
            sum += std::sqrt(p.gamma_p) * model.sites[k].s12;
        }
    }
    return sum;
}

SystemModel to_subspace(const SystemModel& model, const std::optional<Matrix>& initial_state) {
    if (model.is_reduced()) return model;
    const SubspaceEncoding enc(model.layout.dim(), sector_basis(model.layout, model.config.source, model.n_transmons()));
    if (initial_state) {
        if (static_cast<std::size_t>(initial_state->rows()) != model.dim) {
            throw InvalidInput("initial state does not match the model dimension");
        }
        if (enc.leakage(*initial_state) > 1e-12) {
            throw InvalidInput("initial state lies outside the single-excitation sector");
        }
    }
    auto proj = [&](const Matrix& op) { return enc.project(op); };
    SystemModel r;
    r.config = model.config;
    r.config.representation = Representation::reduced;
    r.layout = model.layout;
    r.subspace = enc;
    r.dim = enc.dim();

    r.network.S = model.network.S;
    r.network.system_dim = r.dim;
    for (const auto& l : model.network.L) r.network.L.push_back(l.transformed(proj, r.dim));
    r.network.H = model.network.H.transformed(proj, r.dim);

    r.liouvillian.dim = r.dim;
    r.liouvillian.hamiltonian = model.liouvillian.hamiltonian.transformed(proj, r.dim);
    for (const auto& t : model.liouvillian.dissipators) r.liouvillian.dissipators.push_back({t.envelope, proj(t.op), t.label});
    for (const auto& c : model.liouvillian.coupling_terms) {
        r.liouvillian.coupling_terms.push_back({{c.upstream.envelope, proj(c.upstream.op), c.upstream.label},
                                                {c.downstream.envelope, proj(c.downstream.op), c.downstream.label}});
    }

    for (const auto& s : model.sites) r.sites.push_back({proj(s.s01), proj(s.s12), proj(s.s00), proj(s.s11), proj(s.s22)});
    if (model.cavity_annihilation.size() > 0) r.cavity_annihilation = proj(model.cavity_annihilation);
    r.input_coupling = proj(model.input_coupling);
    r.measurement_op = proj(model.measurement_op);
    r.y_op = proj(model.y_op);
    r.lambda01 = proj(model.lambda01);
    r.lambda12 = proj(model.lambda12);
    for (const auto& p : model.excitation_projectors) r.excitation_projectors.push_back(proj(p));
    r.ground_state = proj(model.ground_state);
    r.photon_state = proj(model.photon_state);
    return r;
}

SystemModel with_dephasing(const SystemModel& model, const std::vector<double>& gamma_phi) {
    if (gamma_phi.size() != model.n_transmons()) {
        throw InvalidInput("one dephasing rate per transmon is required");
    }
    bool any = false;
    for (double g : gamma_phi) {
        if (!(g >= 0.0)) throw InvalidInput("dephasing rate must be non-negative");
        any = any || g > 0.0;
    }
    if (!any) return model;
    SystemModel m = model;
    m.network = append_dephasing(model.network, model.sites, gamma_phi);
    m.liouvillian = to_liouvillian(m.network);
    for (std::size_t k = 0; k < gamma_phi.size(); ++k) m.config.transmons[k].gamma_phi += gamma_phi[k];
    return m;
}

}  // namespace qnd
