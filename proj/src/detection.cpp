#include "qnd/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "qnd/io.hpp"
#include "qnd/linalg.hpp"

namespace qnd {

double signal(const HomodyneRecord& rec, const FilterSpec& filter) {
    if (rec.j.empty()) throw InvalidInput("record has no stored samples");
    const double t_len = static_cast<double>(rec.j.size()) * rec.dt;
    if (filter.t_f > t_len + 1e-9) throw InvalidInput("filter window extends past the record");
    double s = 0.0;
    for (std::size_t k = 0; k < rec.j.size(); ++k) {
        const double w = filter.weight(static_cast<double>(k) * rec.dt);
        if (w != 0.0) s += w * rec.j[k] * rec.dt;
    }
    return s;
}

SampleStats sample_stats(const std::vector<double>& s) {
    SampleStats st;
    st.n = s.size();
    if (s.empty()) return st;
    st.mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double ss = 0.0;
    for (double v : s) ss += (v - st.mean) * (v - st.mean);
    st.var = s.size() > 1 ? ss / static_cast<double>(s.size() - 1) : 0.0;
    return st;
}

namespace {

std::pair<double, double> snr_pair(const SampleStats& a, const SampleStats& b, double t_m) {
    return {b.mean / std::sqrt(b.var + t_m), (b.mean - a.mean) / std::sqrt(b.var + a.var)};
}

double stddev(const std::vector<double>& v) { return std::sqrt(sample_stats(v).var); }

}  // namespace

EmpiricalSnr snr_empirical(const std::vector<double>& s0, const std::vector<double>& s1, double t_m,
                           std::size_t bootstrap, std::uint64_t seed) {
    if (s0.size() < 2 || s1.size() < 2) throw InvalidInput("SNR needs at least two samples per class");
    EmpiricalSnr r;
    const auto [main, sm] = snr_pair(sample_stats(s0), sample_stats(s1), t_m);
    r.snr_main = main;
    r.snr_sm = sm;
    if (bootstrap < 2) return r;
    std::mt19937_64 gen(seed);
    std::vector<double> b0(s0.size()), b1(s1.size()), vm, vs;
    for (std::size_t b = 0; b < bootstrap; ++b) {
        for (auto& v : b0) v = s0[gen() % s0.size()];
        for (auto& v : b1) v = s1[gen() % s1.size()];
        const auto p = snr_pair(sample_stats(b0), sample_stats(b1), t_m);
        vm.push_back(p.first);
        vs.push_back(p.second);
    }
    r.se_main = stddev(vm);
    r.se_sm = stddev(vs);
    return r;
}

FidelityResult fidelity(const std::vector<double>& s0, const std::vector<double>& s1, const Thresholds& th, double prior0) {
    if (s0.empty() || s1.empty()) throw InvalidInput("fidelity needs samples of both classes");
    if (th.s1_t < th.s0_t) throw InvalidInput("upper threshold below lower threshold");
    if (!(prior0 > 0.0 && prior0 < 1.0)) throw InvalidInput("prior must lie in (0, 1)");
    const double n0 = static_cast<double>(s0.size()), n1 = static_cast<double>(s1.size());
    double ok0 = 0, bad0 = 0, ok1 = 0, bad1 = 0;
    for (double v : s0) {
        if (v < th.s0_t) ok0 += 1;
        else if (v > th.s1_t) bad0 += 1;
    }
    for (double v : s1) {
        if (v > th.s1_t) ok1 += 1;
        else if (v < th.s0_t) bad1 += 1;
    }
    const double correct = prior0 * ok0 / n0 + (1.0 - prior0) * ok1 / n1;
    const double wrong = prior0 * bad0 / n0 + (1.0 - prior0) * bad1 / n1;
    FidelityResult r;
    r.thresholds = th;
    r.rejection = std::max(0.0, 1.0 - correct - wrong);
    r.p = correct + wrong > 0.0 ? correct / (correct + wrong) : 0.0;
    return r;
}

namespace {

// Candidate thresholds: midpoints between consecutive distinct pooled values
// plus one below and one above everything. count0[i] = #(s0 < cand[i]),
// count1[i] = #(s1 < cand[i]).
struct Candidates {
    std::vector<double> cand;
    std::vector<double> below0, below1;
};

Candidates candidates(const std::vector<double>& s0, const std::vector<double>& s1) {
    std::vector<std::pair<double, int>> pooled;
    for (double v : s0) pooled.emplace_back(v, 0);
    for (double v : s1) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end());
    Candidates c;
    double b0 = 0, b1 = 0;
    c.cand.push_back(pooled.front().first - 1.0);
    c.below0.push_back(0);
    c.below1.push_back(0);
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        (pooled[i].second == 0 ? b0 : b1) += 1;
        const bool last = i + 1 == pooled.size();
        if (!last && pooled[i + 1].first == pooled[i].first) continue;
        c.cand.push_back(last ? pooled[i].first + 1.0 : 0.5 * (pooled[i].first + pooled[i + 1].first));
        c.below0.push_back(b0);
        c.below1.push_back(b1);
    }
    return c;
}

}  // namespace

FidelityResult best_common_threshold(const std::vector<double>& s0, const std::vector<double>& s1, double prior0) {
    if (s0.empty() || s1.empty()) throw InvalidInput("fidelity needs samples of both classes");
    const Candidates c = candidates(s0, s1);
    const double n0 = static_cast<double>(s0.size()), n1 = static_cast<double>(s1.size());
    const double mid = 0.5 * (sample_stats(s0).mean + sample_stats(s1).mean);
    double best_p = -1.0, best_t = 0.0;
    for (std::size_t i = 0; i < c.cand.size(); ++i) {
        const double p = prior0 * c.below0[i] / n0 + (1.0 - prior0) * (n1 - c.below1[i]) / n1;
        if (p > best_p + 1e-12 || (std::abs(p - best_p) <= 1e-12 && std::abs(c.cand[i] - mid) < std::abs(best_t - mid))) {
            best_p = std::max(p, best_p);
            best_t = c.cand[i];
        }
    }
    return fidelity(s0, s1, {best_t, best_t}, prior0);
}

FidelityResult threshold_pair_for_target(const std::vector<double>& s0, const std::vector<double>& s1, double target,
                                         double prior0) {
    if (s0.empty() || s1.empty()) throw InvalidInput("fidelity needs samples of both classes");
    const Candidates c = candidates(s0, s1);
    const double n0 = static_cast<double>(s0.size()), n1 = static_cast<double>(s1.size());
    const double p0 = prior0, p1 = 1.0 - prior0;
    const std::size_t m = c.cand.size();
    double best_rej = 2.0, best_p = -1.0;
    std::size_t ba = 0, bb = 0;
    double fallback_p = -1.0;
    std::size_t fa = 0, fb = 0;
    for (std::size_t a = 0; a < m; ++a) {
        const double ok0 = p0 * c.below0[a] / n0;
        const double bad1 = p1 * c.below1[a] / n1;
        for (std::size_t b = a; b < m; ++b) {
            const double ok1 = p1 * (n1 - c.below1[b]) / n1;
            const double bad0 = p0 * (n0 - c.below0[b]) / n0;
            const double acc = ok0 + ok1 + bad0 + bad1;
            if (acc <= 0.0) continue;
            const double p = (ok0 + ok1) / acc;
            const double rej = 1.0 - acc;
            if (p >= target && (rej < best_rej - 1e-12 || (std::abs(rej - best_rej) <= 1e-12 && p > best_p))) {
                best_rej = rej;
                best_p = p;
                ba = a;
                bb = b;
            }
            if (p > fallback_p) {
                fallback_p = p;
                fa = a;
                fb = b;
            }
        }
    }
    if (best_p < 0.0) return fidelity(s0, s1, {c.cand[fa], c.cand[fb]}, prior0);
    return fidelity(s0, s1, {c.cand[ba], c.cand[bb]}, prior0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double gaussian_inferred_fidelity(double snr) {
    if (!(snr >= 0.0)) throw InvalidInput("SNR must be non-negative");
    return normal_cdf(snr / std::sqrt(2.0));
}

double gaussian_inferred_fidelity(double mean0, double var0, double mean1, double var1) {
    if (!(var0 > 0.0) || !(var1 > 0.0)) throw InvalidInput("variances must be positive");
    const double sd0 = std::sqrt(var0), sd1 = std::sqrt(var1);
    auto p = [&](double t) { return 0.5 * normal_cdf((t - mean0) / sd0) + 0.5 * (1.0 - normal_cdf((t - mean1) / sd1)); };
    // Golden-section search between the means (P is unimodal there).
    double lo = std::min(mean0, mean1), hi = std::max(mean0, mean1);
    if (hi - lo < 1e-15) return 0.5;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        if (p(a) > p(b)) {
            hi = b;
        } else {
            lo = a;
        }
        a = hi - g * (hi - lo);
        b = lo + g * (hi - lo);
    }
    return p(0.5 * (lo + hi));
}

double fit_sqrtN(const std::vector<std::pair<double, double>>& n_snr) {
    if (n_snr.size() < 3) throw InvalidInput("sqrt(N) fit needs at least three points");
    double num = 0.0, den = 0.0;
    for (const auto& [n, snr] : n_snr) {
        if (!(n > 0.0)) throw InvalidInput("transmon counts must be positive");
        num += snr * std::sqrt(n);
        den += n;
    }
    return num / den;
}

SlidingWindow sliding_window(const HomodyneRecord& rec, double t_m, double stride) {
    if (rec.j.empty()) throw InvalidInput("record has no stored samples");
    const std::size_t n = rec.j.size();
    const auto w = static_cast<std::size_t>(std::llround(t_m / rec.dt));
    const auto s = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(stride / rec.dt)));
    if (w == 0 || w > n) throw InvalidInput("window width must lie within the record");
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + rec.j[k] * rec.dt;
    SlidingWindow out;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + w <= n; k += s) {
        const double v = prefix[k + w] - prefix[k];
        out.tau.push_back(static_cast<double>(k) * rec.dt);
        out.s.push_back(v);
        if (v > best) {
            best = v;
            out.peak_tau = out.tau.back();
        }
    }
    return out;
}

Histogram histogram(const std::vector<double>& s0, const std::vector<double>& s1, std::size_t bins) {
    if (bins == 0) throw InvalidInput("histogram needs at least one bin");
    Histogram h;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : s0) lo = std::min(lo, v), hi = std::max(hi, v);
    for (double v : s1) lo = std::min(lo, v), hi = std::max(hi, v);
    if (!(hi > lo)) {
        lo = std::isfinite(lo) ? lo - 0.5 : 0.0;
        hi = lo + 1.0;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
    h.count0.assign(bins, 0);
    h.count1.assign(bins, 0);
    auto bin_of = [&](double v) {
        auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
        return std::min(b, bins - 1);
    };
    for (double v : s0) ++h.count0[bin_of(v)];
    for (double v : s1) ++h.count1[bin_of(v)];
    return h;
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
    os << "bin_left,bin_right,count_0,count_1\n";
    for (std::size_t b = 0; b < h.count0.size(); ++b) {
        os << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ',' << h.count0[b] << ','
           << h.count1[b] << '\n';
    }
}

DetectionSummary summarize(const std::vector<double>& s0, const std::vector<double>& s1, double t_m, double pair_target,
                           std::size_t bins) {
    DetectionSummary d;
    d.stats0 = sample_stats(s0);
    d.stats1 = sample_stats(s1);
    d.t_m = t_m;
    d.snr = snr_empirical(s0, s1, t_m);
    d.common = best_common_threshold(s0, s1);
    d.pair_target = pair_target;
    d.pair = threshold_pair_for_target(s0, s1, pair_target);
    d.inferred_fidelity = gaussian_inferred_fidelity(d.stats0.mean, d.stats0.var, d.stats1.mean, d.stats1.var);
    d.hist = histogram(s0, s1, bins);
    return d;
}

std::string summary_json(const DetectionSummary& s) {
    nlohmann::ordered_json j;
    j["n0"] = s.stats0.n;
    j["n1"] = s.stats1.n;
    j["mean0"] = s.stats0.mean;
    j["var0"] = s.stats0.var;
    j["mean1"] = s.stats1.mean;
    j["var1"] = s.stats1.var;
    j["t_m"] = s.t_m;
    j["snr_main"] = s.snr.snr_main;
    j["snr_main_se"] = s.snr.se_main;
    j["snr_sm"] = s.snr.snr_sm;
    j["snr_sm_se"] = s.snr.se_sm;
    j["fidelity_common"] = {{"p", s.common.p}, {"rejection", s.common.rejection}, {"threshold", s.common.thresholds.s0_t}};
    j["fidelity_pair"] = {{"target", s.pair_target},
                          {"p", s.pair.p},
                          {"rejection", s.pair.rejection},
                          {"s0_t", s.pair.thresholds.s0_t},
                          {"s1_t", s.pair.thresholds.s1_t}};
    j["fidelity_inferred"] = s.inferred_fidelity;
    j["invalid_trajectories"] = s.invalid;
    return j.dump(2);
}

}  // namespace qnd
