#pragma once

#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "qnd/hilbert.hpp"
#include "qnd/linalg.hpp"
#include "qnd/pulse.hpp"
#include "qnd/slh.hpp"

namespace qnd {

enum class SourceKind { cavity, fock };
enum class Representation { reduced, full };

std::string to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& name);

/// Physical description of the detector chain. All rates and times are in
/// units of the first transmon's 0-1 coupling.
struct ChainConfig {
    std::vector<TransmonParams> transmons;
    SourceKind source = SourceKind::cavity;
    PulseShape pulse = PulseShape::gaussian(0.8, 4.0, 16.0);
    double probe_amplitude = 0.0;  ///< Omega_p; the probe amplitude is i * Omega_p
    double p_loss = 0.0;           ///< power loss per circulator, r = sqrt(p_loss)
    double eta = 1.0;              ///< homodyne efficiency
    double phi = std::numbers::pi / 2.0;
    Representation representation = Representation::reduced;

    std::size_t n_transmons() const { return transmons.size(); }
    void validate() const;
};

/// Fully composed detector network plus the operators the engines need.
/// Immutable after construction.
struct SystemModel {
    ChainConfig config;
    HilbertLayout layout;                      ///< full tensor layout
    std::optional<SubspaceEncoding> subspace;  ///< set for reduced models
    std::size_t dim = 0;

    SLHTriplet network;
    LiouvillianSpec liouvillian;

    std::vector<TransmonSiteOps> sites;
    Matrix cavity_annihilation;  ///< empty for Fock-source models
    Matrix input_coupling;       ///< system part of the control output channel
    Matrix measurement_op;       ///< c with y = e^{i phi} c + e^{-i phi} c^dag
    Matrix y_op;
    Matrix lambda01, lambda12;
    std::vector<Matrix> excitation_projectors;  ///< |1><1| + |2><2| per transmon

    Matrix ground_state;  ///< vacuum source, all transmons in |0>
    Matrix photon_state;  ///< one photon in the source cavity (ground for Fock)

    bool is_fock() const { return config.source == SourceKind::fock; }
    std::size_t n_transmons() const { return config.n_transmons(); }
    bool is_reduced() const { return subspace.has_value(); }
};

SystemModel build_chain(const ChainConfig& cfg);

enum class Transition { t01, t12 };

/// Lambda_ij = sum_k L_ij^(k).
Matrix collective_operator(const SystemModel& model, Transition ij);

/// Projects a full-representation model onto the single-excitation sector.
/// Throws InvalidInput when `initial_state` has weight outside the sector.
SystemModel to_subspace(const SystemModel& model, const std::optional<Matrix>& initial_state = std::nullopt);

/// Dimension of the excitation sector for a chain of n transmons.
std::size_t sector_dimension(SourceKind source, std::size_t n_transmons);

/// Appends one (gamma_phi / 2) D[2 s11 + 4 s22] channel per transmon with a
/// non-zero rate and re-extracts the Liouvillian. Returns the model unchanged
/// when every rate is zero.
SystemModel with_dephasing(const SystemModel& model, const std::vector<double>& gamma_phi);

}  // namespace qnd
