#pragma once

#include <limits>
#include <string>
#include <vector>

namespace qnd {

enum class PulseKind { gaussian, decaying_exp, rising_exp, tabulated };

std::string to_string(PulseKind kind);
PulseKind pulse_kind_from_string(const std::string& name);

/// Single-photon wavepacket envelope xi(t), normalised on [0, t_end].
///
/// Catalog shapes (gamma = bandwidth, t_ph = offset):
///   gaussian      (gamma^2 / 2pi)^(1/4) exp(-gamma^2 (t - t_ph)^2 / 4)
///   decaying_exp  Theta(t_ph - t) sqrt(gamma) exp(-gamma t / 2)
///   rising_exp    Theta(t_ph - t) sqrt(gamma) exp(gamma (t - t_ph) / 2)
/// Tabulated envelopes are linearly interpolated and zero outside the table.
///
/// The source-cavity coupling that emits this envelope is
///   sqrt(kappa(t)) = xi(t) / sqrt(int_t^t_end |xi|^2),
/// capped at kappa_max and switched off once the remaining tail drops below
/// tail_floor.
class PulseShape {
public:
    static constexpr double kDefaultKappaMax = 1e3;
    static constexpr double kDefaultTailFloor = 1e-8;

    static PulseShape gaussian(double gamma, double t_ph, double t_end);
    static PulseShape decaying_exp(double gamma, double t_ph, double t_end);
    static PulseShape rising_exp(double gamma, double t_ph, double t_end);
    static PulseShape tabulated(std::vector<double> times, std::vector<double> values, double t_end);
    /// Reads a two-column (t, xi) whitespace or comma separated text table.
    static PulseShape from_table_file(const std::string& path, double t_end);

    PulseKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    double t_ph() const { return t_ph_; }
    double t_end() const { return t_end_; }
    const std::vector<double>& table_times() const { return times_; }
    const std::vector<double>& table_values() const { return values_; }

    /// Normalised envelope.
    double xi(double t) const;
    /// |xi(t)|^2 (normalised).
    double flux(double t) const;
    /// int_t^t_end |xi|^2 (normalised), 0 past t_end.
    double tail(double t) const;
    /// int_0^t_end |xi|^2 of the raw (unnormalised) envelope.
    double raw_norm() const { return raw_norm_; }

    double kappa(double t) const;
    /// Signed square root of kappa carrying the sign of xi.
    double sqrt_kappa(double t) const;

    double kappa_max() const { return kappa_max_; }
    double tail_floor() const { return tail_floor_; }
    PulseShape with_guards(double kappa_max, double tail_floor) const;

    /// Copy whose stored samples are rescaled to unit norm; catalog shapes
    /// are already normalised so this is the identity for them.
    PulseShape normalized() const;

    PulseShape with_t_end(double t_end) const;

private:
    PulseShape() = default;
    void init();
    double raw_xi(double t) const;
    double raw_tail(double t) const;  // int_t^t_end |raw xi|^2

    PulseKind kind_ = PulseKind::gaussian;
    double gamma_ = 0.0;
    double t_ph_ = 0.0;
    double t_end_ = std::numeric_limits<double>::infinity();
    double raw_norm_ = 1.0;
    double kappa_max_ = kDefaultKappaMax;
    double tail_floor_ = kDefaultTailFloor;
    std::vector<double> times_, values_;
    std::vector<double> cumulative_;  // int_{times_0}^{times_i} |raw xi|^2
};

}  // namespace qnd
