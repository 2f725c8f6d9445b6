#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qnd/detection.hpp"

using namespace qnd;

namespace {

std::vector<double> normals(std::size_t n, double mean, double sd, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> d(mean, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = d(gen);
    return v;
}

}  // namespace

TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429));
    CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025));
}

TEST_CASE("inferred fidelity of equal-variance classes") {
    CHECK(gaussian_inferred_fidelity(0.0) == doctest::Approx(0.5));
    // separation 2 sigma: midpoint threshold gives Phi(1)
    const double snr = 2.0 / std::sqrt(2.0);
    CHECK(gaussian_inferred_fidelity(snr) == doctest::Approx(normal_cdf(1.0)));
    CHECK(gaussian_inferred_fidelity(0.0, 1.0, 2.0, 1.0) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-6));
    // unequal variances can only help the optimal threshold
    CHECK(gaussian_inferred_fidelity(0.0, 1.0, 2.0, 4.0) >= 0.5 * (normal_cdf(1.0) + normal_cdf(-0.5)) - 1e-9);
}

TEST_CASE("sample statistics are unbiased") {
    const SampleStats s = sample_stats({1.0, 2.0, 3.0, 4.0});
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.var == doctest::Approx(5.0 / 3.0));
    CHECK(s.n == 4);
}

TEST_CASE("common threshold on hand-made samples") {
    const FidelityResult sep = best_common_threshold({0.0, 1.0, 2.0}, {3.0, 4.0, 5.0});
    CHECK(sep.p == 1.0);
    CHECK(sep.thresholds.s0_t == doctest::Approx(2.5));
    CHECK(sep.rejection == 0.0);
    const FidelityResult ov = best_common_threshold({0.0, 2.0}, {1.0, 3.0});
    CHECK(ov.p == doctest::Approx(0.75));
}

TEST_CASE("fidelity counts decisions and rejections") {
    const std::vector<double> s0{0.0, 2.0}, s1{1.0, 3.0};
    const FidelityResult r = fidelity(s0, s1, {0.5, 2.5});
    CHECK(r.p == 1.0);
    CHECK(r.rejection == doctest::Approx(0.5));
    const FidelityResult all = fidelity(s0, s1, {1.5, 1.5});
    CHECK(all.rejection == 0.0);
    CHECK(all.p == doctest::Approx(0.5));
}

TEST_CASE("pair scan finds the smallest rejection meeting the target") {
    const FidelityResult r = threshold_pair_for_target({0.0, 2.0}, {1.0, 3.0}, 1.0);
    CHECK(r.p == 1.0);
    CHECK(r.rejection == doctest::Approx(0.5));
    const FidelityResult easy = threshold_pair_for_target({0.0, 1.0}, {2.0, 3.0}, 0.95);
    CHECK(easy.rejection == 0.0);
}

TEST_CASE("empirical fidelities approach the normal-model values") {
    const auto s0 = normals(20000, 0.0, 1.0, 1), s1 = normals(20000, 2.0, 1.0, 2);
    const FidelityResult c = best_common_threshold(s0, s1);
    CHECK(c.p == doctest::Approx(normal_cdf(1.0)).epsilon(0.01));
    CHECK(c.thresholds.s0_t == doctest::Approx(1.0).epsilon(0.1));
    const FidelityResult p = threshold_pair_for_target(s0, s1, 0.95);
    CHECK(p.p >= 0.95);
    CHECK(p.rejection > 0.0);
    CHECK(p.thresholds.s0_t <= p.thresholds.s1_t);
}

TEST_CASE("empirical SNR and bootstrap errors") {
    const auto s0 = normals(4000, 0.0, 1.0, 3), s1 = normals(4000, 1.0, 1.0, 4);
    const EmpiricalSnr e = snr_empirical(s0, s1, 1.0);
    CHECK(e.snr_sm == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
    CHECK(e.snr_main == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
    CHECK(e.se_sm > 0.005);
    CHECK(e.se_sm < 0.05);
    const EmpiricalSnr again = snr_empirical(s0, s1, 1.0);
    CHECK(again.se_main == e.se_main);
}

TEST_CASE("sqrt(N) fit") {
    std::vector<std::pair<double, double>> pts;
    for (int n = 1; n <= 8; ++n) pts.emplace_back(n, 0.6 * std::sqrt(n));
    CHECK(fit_sqrtN(pts) == doctest::Approx(0.6));
    CHECK_THROWS_AS(fit_sqrtN({}), InvalidInput);
}

TEST_CASE("sliding window peaks where the current is high") {
    HomodyneRecord rec;
    rec.dt = 0.01;
    rec.j.assign(1000, 0.0);
    for (std::size_t k = 500; k < 600; ++k) rec.j[k] = 1.0;
    const SlidingWindow w = sliding_window(rec, 1.0, 0.1);
    CHECK(w.peak_tau == doctest::Approx(5.0));
    double best = 0.0;
    for (double s : w.s) best = std::max(best, s);
    CHECK(best == doctest::Approx(1.0));
}

TEST_CASE("histograms and summaries") {
    const auto s0 = normals(500, 0.0, 1.0, 5), s1 = normals(500, 3.0, 1.0, 6);
    const Histogram h = histogram(s0, s1, 20);
    CHECK(h.edges.size() == 21);
    std::size_t c0 = 0, c1 = 0;
    for (auto c : h.count0) c0 += c;
    for (auto c : h.count1) c1 += c;
    CHECK(c0 == 500);
    CHECK(c1 == 500);
    std::ostringstream os;
    write_histogram_csv(os, h);
    CHECK(os.str().rfind("bin_left,bin_right,count_0,count_1\n", 0) == 0);

    const DetectionSummary s = summarize(s0, s1, 1.0);
    const auto j = nlohmann::json::parse(summary_json(s));
    CHECK(j.contains("snr_main"));
    CHECK(j.contains("fidelity_common"));
    CHECK(j["n0"].get<int>() == 500);
}

TEST_CASE("degenerate inputs") {
    CHECK_THROWS_AS(best_common_threshold({}, {1.0}), InvalidInput);
    CHECK(sample_stats({}).n == 0);
    CHECK_THROWS_AS(snr_empirical({1.0}, {1.0, 2.0}, 1.0), InvalidInput);
    CHECK_THROWS_AS(fidelity({0.0}, {1.0}, {2.0, 1.0}), InvalidInput);
}
