#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qnd/filter.hpp"
#include "qnd/sme_engine.hpp"

namespace qnd {

/// S = sum_k f(t_k) j[k] dt over a record with kept samples.
double signal(const HomodyneRecord& rec, const FilterSpec& filter);

struct SampleStats {
    double mean = 0.0;
    double var = 0.0;  // unbiased
    std::size_t n = 0;
};
SampleStats sample_stats(const std::vector<double>& s);

struct EmpiricalSnr {
    double snr_main = 0.0;  // E[S1] / sqrt(Var[S1] + t_m)
    double snr_sm = 0.0;    // (E[S1] - E[S0]) / sqrt(Var[S1] + Var[S0])
    double se_main = 0.0;   // bootstrap standard errors
    double se_sm = 0.0;
};

/// `t_m` is the filter energy int f^2 (the window length for a boxcar).
EmpiricalSnr snr_empirical(const std::vector<double>& s0, const std::vector<double>& s1, double t_m,
                           std::size_t bootstrap = 200, std::uint64_t seed = 20240601);

/// Decide 0 when S < s0_t, 1 when S > s1_t, inconclusive in between.
struct Thresholds {
    double s0_t = 0.0;
    double s1_t = 0.0;
};

struct FidelityResult {
    double p = 0.0;          // correct-inference probability on accepted samples
    double rejection = 0.0;  // prior-weighted inconclusive fraction
    Thresholds thresholds;
};

FidelityResult fidelity(const std::vector<double>& s0, const std::vector<double>& s1, const Thresholds& th,
                        double prior0 = 0.5);

/// Common threshold maximising the empirical P; ties go to the candidate
/// closest to the midpoint of the class means.
FidelityResult best_common_threshold(const std::vector<double>& s0, const std::vector<double>& s1, double prior0 = 0.5);

/// Threshold pair with the smallest rejection whose P reaches `target`.
/// Returns the best achievable P when the target cannot be met.
FidelityResult threshold_pair_for_target(const std::vector<double>& s0, const std::vector<double>& s1, double target,
                                         double prior0 = 0.5);

/// Fidelity of two equal-variance normals separated by the given SNR with
/// the midpoint threshold: Phi(snr / sqrt 2).
double gaussian_inferred_fidelity(double snr);
/// Class-wise normal fits with the P-maximising common threshold.
double gaussian_inferred_fidelity(double mean0, double var0, double mean1, double var1);

double normal_cdf(double x);

/// Least-squares slope of SNR = chi sqrt(N).
double fit_sqrtN(const std::vector<std::pair<double, double>>& n_snr);

struct SlidingWindow {
    std::vector<double> tau;  // window start times
    std::vector<double> s;
    double peak_tau = 0.0;
};
/// Moving boxcar sums of width t_m started every `stride`.
SlidingWindow sliding_window(const HomodyneRecord& rec, double t_m, double stride);

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> count0, count1;
};
Histogram histogram(const std::vector<double>& s0, const std::vector<double>& s1, std::size_t bins = 40);
void write_histogram_csv(std::ostream& os, const Histogram& h);

struct DetectionSummary {
    SampleStats stats0, stats1;
    double t_m = 0.0;
    EmpiricalSnr snr;
    FidelityResult common;
    FidelityResult pair;
    double pair_target = 0.95;
    double inferred_fidelity = 0.0;
    Histogram hist;
    std::size_t invalid = 0;
};

DetectionSummary summarize(const std::vector<double>& s0, const std::vector<double>& s1, double t_m,
                           double pair_target = 0.95, std::size_t bins = 40);

/// JSON object with means, variances, SNRs, fidelities and thresholds.
std::string summary_json(const DetectionSummary& s);

}  // namespace qnd
