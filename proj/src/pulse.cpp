#include "qnd/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qnd/io.hpp"
#include "qnd/linalg.hpp"

namespace qnd {

std::string to_string(PulseKind kind) {
    switch (kind) {
        case PulseKind::gaussian: return "gaussian";
        case PulseKind::decaying_exp: return "decaying_exp";
        case PulseKind::rising_exp: return "rising_exp";
        case PulseKind::tabulated: return "tabulated";
    }
    return "unknown";
}

PulseKind pulse_kind_from_string(const std::string& name) {
    if (name == "gaussian") return PulseKind::gaussian;
    if (name == "decaying_exp") return PulseKind::decaying_exp;
    if (name == "rising_exp") return PulseKind::rising_exp;
    if (name == "tabulated") return PulseKind::tabulated;
    throw InvalidInput("unknown pulse shape '" + name + "'");
}

namespace {

void check_catalog(double gamma, double t_ph, double t_end) {
    if (!(gamma > 0.0)) throw InvalidInput("pulse bandwidth must be positive");
    if (std::isnan(t_ph) || t_ph < 0.0) throw InvalidInput("pulse offset must be non-negative");
    if (!(t_end > 0.0)) throw InvalidInput("pulse domain end must be positive");
}

double upper_tail(double gamma, double t_ph, double t) {
    // int_t^inf of the normal density with mean t_ph, sigma 1/gamma
    return 0.5 * std::erfc(gamma * (t - t_ph) / std::numbers::sqrt2);
}

}  // namespace

PulseShape PulseShape::gaussian(double gamma, double t_ph, double t_end) {
    check_catalog(gamma, t_ph, t_end);
    PulseShape p;
    p.kind_ = PulseKind::gaussian;
    p.gamma_ = gamma;
    p.t_ph_ = t_ph;
    p.t_end_ = t_end;
    p.init();
    return p;
}

PulseShape PulseShape::decaying_exp(double gamma, double t_ph, double t_end) {
    check_catalog(gamma, t_ph, t_end);
    PulseShape p;
    p.kind_ = PulseKind::decaying_exp;
    p.gamma_ = gamma;
    p.t_ph_ = t_ph;
    p.t_end_ = t_end;
    p.init();
    return p;
}

PulseShape PulseShape::rising_exp(double gamma, double t_ph, double t_end) {
    check_catalog(gamma, t_ph, t_end);
    if (!std::isfinite(t_ph)) throw InvalidInput("rising exponential needs a finite cut-off time");
    PulseShape p;
    p.kind_ = PulseKind::rising_exp;
    p.gamma_ = gamma;
    p.t_ph_ = t_ph;
    p.t_end_ = t_end;
    p.init();
    return p;
}

PulseShape PulseShape::tabulated(std::vector<double> times, std::vector<double> values, double t_end) {
    if (times.size() != values.size() || times.size() < 2) {
        throw InvalidInput("tabulated pulse needs at least two (t, xi) rows");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw InvalidInput("tabulated pulse times must be strictly increasing");
    }
    if (times.front() < 0.0) throw InvalidInput("tabulated pulse times must be non-negative");
    PulseShape p;
    p.kind_ = PulseKind::tabulated;
    p.t_end_ = t_end;
    p.times_ = std::move(times);
    p.values_ = std::move(values);
    p.init();
    return p;
}

PulseShape PulseShape::from_table_file(const std::string& path, double t_end) {
    std::vector<double> ts, xs;
    read_two_column(path, ts, xs);
    return tabulated(std::move(ts), std::move(xs), t_end);
}

void PulseShape::init() {
    if (kind_ == PulseKind::tabulated) {
        cumulative_.assign(times_.size(), 0.0);
        for (std::size_t i = 1; i < times_.size(); ++i) {
            const double h = times_[i] - times_[i - 1];
            const double a = values_[i - 1];
            const double b = values_[i];
            cumulative_[i] = cumulative_[i - 1] + h * (a * a + a * b + b * b) / 3.0;
        }
    }
    raw_norm_ = raw_tail(0.0);
    if (!(raw_norm_ > 0.0)) throw InvalidInput("pulse has zero norm on its domain");
}

double PulseShape::raw_xi(double t) const {
    if (t < 0.0 || t > t_end_) return 0.0;
    switch (kind_) {
        case PulseKind::gaussian: {
            const double d = t - t_ph_;
            return std::pow(gamma_ * gamma_ / (2.0 * std::numbers::pi), 0.25) * std::exp(-gamma_ * gamma_ * d * d / 4.0);
        }
        case PulseKind::decaying_exp:
            return t <= t_ph_ ? std::sqrt(gamma_) * std::exp(-gamma_ * t / 2.0) : 0.0;
        case PulseKind::rising_exp:
            return t <= t_ph_ ? std::sqrt(gamma_) * std::exp(gamma_ * (t - t_ph_) / 2.0) : 0.0;
        case PulseKind::tabulated: {
            if (t < times_.front() || t > times_.back()) return 0.0;
            auto it = std::upper_bound(times_.begin(), times_.end(), t);
            if (it == times_.end()) return values_.back();
            const auto i = static_cast<std::size_t>(it - times_.begin());
            const double u = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
            return values_[i - 1] + u * (values_[i] - values_[i - 1]);
        }
    }
    return 0.0;
}

double PulseShape::raw_tail(double t) const {
    t = std::max(t, 0.0);
    if (t >= t_end_) return 0.0;
    switch (kind_) {
        case PulseKind::gaussian: {
            const double end = std::isfinite(t_end_) ? upper_tail(gamma_, t_ph_, t_end_) : 0.0;
            return std::max(0.0, upper_tail(gamma_, t_ph_, t) - end);
        }
        case PulseKind::decaying_exp: {
            const double b = std::min(t_ph_, t_end_);
            if (t >= b) return 0.0;
            const double end = std::isfinite(b) ? std::exp(-gamma_ * b) : 0.0;
            return std::exp(-gamma_ * t) - end;
        }
        case PulseKind::rising_exp: {
            const double b = std::min(t_ph_, t_end_);
            if (t >= b) return 0.0;
            return std::exp(gamma_ * (b - t_ph_)) - std::exp(gamma_ * (t - t_ph_));
        }
        case PulseKind::tabulated: {
            const double b = std::min(t_end_, times_.back());
            auto cum_at = [&](double s) {
                if (s <= times_.front()) return 0.0;
                if (s >= times_.back()) return cumulative_.back();
                auto it = std::upper_bound(times_.begin(), times_.end(), s);
                const auto i = static_cast<std::size_t>(it - times_.begin());
                const double h = s - times_[i - 1];
                const double a = values_[i - 1];
                const double c = raw_xi(s);
                return cumulative_[i - 1] + h * (a * a + a * c + c * c) / 3.0;
            };
            if (t >= b) return 0.0;
            return std::max(0.0, cum_at(b) - cum_at(t));
        }
    }
    return 0.0;
}

double PulseShape::xi(double t) const { return raw_xi(t) / std::sqrt(raw_norm_); }

double PulseShape::flux(double t) const {
    const double x = xi(t);
    return x * x;
}

double PulseShape::tail(double t) const { return raw_tail(t) / raw_norm_; }

double PulseShape::sqrt_kappa(double t) const {
    const double remaining = tail(t);
    if (remaining < tail_floor_) return 0.0;
    const double v = xi(t) / std::sqrt(remaining);
    const double cap = std::sqrt(kappa_max_);
    return std::clamp(v, -cap, cap);
}

double PulseShape::kappa(double t) const {
    const double s = sqrt_kappa(t);
    return s * s;
}

PulseShape PulseShape::with_guards(double kappa_max, double tail_floor) const {
    if (!(kappa_max > 0.0) || !(tail_floor >= 0.0)) throw InvalidInput("invalid kappa guards");
    PulseShape p = *this;
    p.kappa_max_ = kappa_max;
    p.tail_floor_ = tail_floor;
    return p;
}

PulseShape PulseShape::normalized() const {
    if (kind_ != PulseKind::tabulated) return *this;
    const double scale = 1.0 / std::sqrt(raw_norm_);
    std::vector<double> v = values_;
    for (auto& x : v) x *= scale;
    return tabulated(times_, std::move(v), t_end_).with_guards(kappa_max_, tail_floor_);
}

PulseShape PulseShape::with_t_end(double t_end) const {
    if (!(t_end > 0.0)) throw InvalidInput("pulse domain end must be positive");
    PulseShape p = *this;
    p.t_end_ = t_end;
    p.init();
    return p;
}

}  // namespace qnd
