#pragma once

#include <string>
#include <vector>

namespace qnd {

enum class FilterKind { boxcar, matched, table };

std::string to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

/// Linear filter f(t) applied to the homodyne current, S = int f j dt.
/// A matched filter uses f(t) = E[j(t)] of the one-photon class; the QRT
/// engine evaluates it on the fly, the Monte Carlo pipeline needs it
/// tabulated first (see tabulate_matched_filter).
struct FilterSpec {
    FilterKind kind = FilterKind::boxcar;
    double t_i = 4.0;
    double t_f = 8.0;
    std::vector<double> times;   // table / tabulated matched filter
    std::vector<double> values;

    static FilterSpec boxcar(double t_i, double t_f);
    static FilterSpec matched(double t_i, double t_f);
    static FilterSpec table(std::vector<double> times, std::vector<double> values);

    double t_m() const { return t_f - t_i; }
    bool tabulated() const { return !times.empty(); }

    /// Filter weight; boxcar windows are half-open [t_i, t_f). Throws for an
    /// untabulated matched filter.
    double weight(double t) const;

    void validate() const;
};

/// Default probe window for a chain of n transmons: 4 < t < 8 + 1.5 (n - 1).
FilterSpec default_window(std::size_t n_transmons);

}  // namespace qnd
