#include "qnd/filter.hpp"

#include <algorithm>
#include <cmath>

#include "qnd/linalg.hpp"

namespace qnd {

std::string to_string(FilterKind kind) {
    switch (kind) {
        case FilterKind::boxcar: return "boxcar";
        case FilterKind::matched: return "matched";
        case FilterKind::table: return "table";
    }
    return "boxcar";
}

FilterKind filter_kind_from_string(const std::string& name) {
    if (name == "boxcar") return FilterKind::boxcar;
    if (name == "matched") return FilterKind::matched;
    if (name == "table") return FilterKind::table;
    throw InvalidInput("unknown filter kind '" + name + "' (expected boxcar, matched or table)");
}

FilterSpec FilterSpec::boxcar(double t_i, double t_f) {
    FilterSpec f;
    f.kind = FilterKind::boxcar;
    f.t_i = t_i;
    f.t_f = t_f;
    f.validate();
    return f;
}

FilterSpec FilterSpec::matched(double t_i, double t_f) {
    FilterSpec f = boxcar(t_i, t_f);
    f.kind = FilterKind::matched;
    return f;
}

FilterSpec FilterSpec::table(std::vector<double> times, std::vector<double> values) {
    FilterSpec f;
    f.kind = FilterKind::table;
    if (times.size() < 2 || times.size() != values.size()) throw InvalidInput("filter table needs >= 2 (t, f) rows");
    f.t_i = times.front();
    f.t_f = times.back();
    f.times = std::move(times);
    f.values = std::move(values);
    f.validate();
    return f;
}

void FilterSpec::validate() const {
    if (!(t_i >= 0.0) || !(t_f > t_i)) throw InvalidInput("filter window needs t_f > t_i >= 0");
    if (times.size() != values.size()) throw InvalidInput("filter table columns differ in length");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw InvalidInput("filter table times must increase");
    }
}

double FilterSpec::weight(double t) const {
    // Grid points are k * dt; the tolerance keeps t_f itself outside.
    constexpr double eps = 1e-9;
    if (t < t_i - eps || t >= t_f - eps) return 0.0;
    if (kind == FilterKind::boxcar) return 1.0;
    if (times.empty()) throw InvalidInput("matched filter must be tabulated before use");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return (1.0 - w) * values[j - 1] + w * values[j];
}

FilterSpec default_window(std::size_t n_transmons) {
    const double n = static_cast<double>(std::max<std::size_t>(1, n_transmons));
    return FilterSpec::boxcar(4.0, 8.0 + 1.5 * (n - 1.0));
}

}  // namespace qnd
