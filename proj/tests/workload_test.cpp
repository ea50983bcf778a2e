#include "pagurus/workload.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pagurus/latency.hpp"
#include "support/expect_errc.hpp"

namespace pagurus {
namespace {

std::size_t count_in(const std::vector<double>& t, double lo, double hi) {
    return static_cast<std::size_t>(std::count_if(t.begin(), t.end(), [&](double x) { return x >= lo && x < hi; }));
}

TEST(SampleArrivals, PoissonCountWithinThreeSigma) {
    const auto t = sample_arrivals(ArrivalProcess::poisson(2.0), 1e5, 3);
    const double mean = 2e5, sd = std::sqrt(mean);
    EXPECT_NEAR(static_cast<double>(t.size()), mean, 3.0 * sd);
    EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
    EXPECT_GT(t.front(), 0.0);
    EXPECT_LE(t.back(), 1e5);
}

TEST(SampleArrivals, PoissonGapsLookExponential) {
    const auto t = sample_arrivals(ArrivalProcess::poisson(4.0), 5e4, 8);
    std::vector<double> gaps(t.size());
    std::adjacent_difference(t.begin(), t.end(), gaps.begin());
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    EXPECT_NEAR(mean, 0.25, 0.005);
    const auto over = std::count_if(gaps.begin(), gaps.end(), [](double g) { return g > 0.25; });
    EXPECT_NEAR(static_cast<double>(over) / static_cast<double>(gaps.size()), std::exp(-1.0), 0.01);
}

TEST(SampleArrivals, FixedIntervalIsExact) {
    const auto t = sample_arrivals(ArrivalProcess::fixed_interval(60.0), 600.0, 1);
    ASSERT_EQ(t.size(), 10u);
    for (std::size_t k = 0; k < t.size(); ++k) EXPECT_DOUBLE_EQ(t[k], 60.0 * static_cast<double>(k + 1));
}

TEST(SampleArrivals, BurstMultipliesRateInsideWindow) {
    // many replications of a 300 s trace; rates within 3 sigma of 1 and 3
    const auto p = ArrivalProcess::burst(1.0, 3.0, 100.0, 200.0);
    const int reps = 200;
    double inside = 0, before = 0, after = 0;
    for (int s = 0; s < reps; ++s) {
        const auto t = sample_arrivals(p, 300.0, static_cast<std::uint64_t>(s));
        inside += static_cast<double>(count_in(t, 100.0, 200.0));
        before += static_cast<double>(count_in(t, 0.0, 100.0));
        after += static_cast<double>(count_in(t, 200.0, 300.1));
    }
    const double exposure = 100.0 * reps;
    EXPECT_NEAR(inside / exposure, 3.0, 3.0 * std::sqrt(3.0 / exposure));
    EXPECT_NEAR(before / exposure, 1.0, 3.0 * std::sqrt(1.0 / exposure));
    EXPECT_NEAR(after / exposure, 1.0, 3.0 * std::sqrt(1.0 / exposure));
}

TEST(SampleArrivals, DiurnalFollowsTheCurve) {
    const auto p = ArrivalProcess::diurnal(0.6, 2.0, 1000.0);
    EXPECT_DOUBLE_EQ(p.rate_at(0.0), 0.6);
    EXPECT_DOUBLE_EQ(p.rate_at(500.0), 2.0);
    const auto t = sample_arrivals(p, 1e5, 4);
    // trough quarter versus peak quarter of each cycle
    double trough = 0, peak = 0;
    for (double x : t) {
        const double phase = std::fmod(x, 1000.0);
        if (phase < 125.0 || phase >= 875.0) ++trough;
        if (phase >= 375.0 && phase < 625.0) ++peak;
    }
    // integrals of the curve over those quarters, times 100 cycles
    const double pi = std::numbers::pi;
    const double half = 1.4 * 0.5;
    const double trough_mass = 100.0 * (0.6 * 250.0 + half * (250.0 - 2.0 * 1000.0 / (2.0 * pi) * std::sin(pi / 4.0)));
    const double peak_mass = 100.0 * (0.6 * 250.0 + half * (250.0 + 2.0 * 1000.0 / (2.0 * pi) * std::sin(pi / 4.0)));
    EXPECT_NEAR(trough, trough_mass, 3.0 * std::sqrt(trough_mass));
    EXPECT_NEAR(peak, peak_mass, 3.0 * std::sqrt(peak_mass));
}

TEST(SampleArrivals, SameSeedSameTrace) {
    const auto p = ArrivalProcess::poisson(1.5);
    EXPECT_EQ(sample_arrivals(p, 500.0, 42), sample_arrivals(p, 500.0, 42));
    EXPECT_NE(sample_arrivals(p, 500.0, 42), sample_arrivals(p, 500.0, 43));
}

TEST(SampleArrivals, RejectsBadProcesses) {
    EXPECT_ERRC(sample_arrivals(ArrivalProcess::poisson(1.0), 0.0, 1), Errc::InvalidParam);
    EXPECT_ERRC(sample_arrivals(ArrivalProcess::poisson(0.0), 10.0, 1), Errc::ConfigError);
    EXPECT_ERRC(sample_arrivals(ArrivalProcess::diurnal(3.0, 2.0, 10.0), 10.0, 1), Errc::ConfigError);
    EXPECT_ERRC(sample_arrivals(ArrivalProcess::burst(1.0, 0.5, 0.0, 5.0), 10.0, 1), Errc::ConfigError);
    EXPECT_ERRC(sample_arrivals(ArrivalProcess::fixed_interval(-1.0), 10.0, 1), Errc::ConfigError);
}

TEST(Distribution, MeansMatchSamples) {
    Rng rng(5);
    for (const auto& d : {Distribution::exponential(0.4), Distribution::lognormal(2.0, 0.1),
                          Distribution::uniform(1.0, 3.0), Distribution::fixed(0.7)}) {
        double sum = 0;
        const int n = 200'000;
        for (int i = 0; i < n; ++i) sum += d.sample(rng);
        EXPECT_NEAR(sum / n, d.mean(), 0.01 * d.mean()) << to_string(d.kind);
    }
}

TEST(Distribution, ValidationAndModelDefaults) {
    EXPECT_ERRC(Distribution::exponential(0.0).validate("x"), Errc::ConfigError);
    EXPECT_ERRC(Distribution::uniform(2.0, 1.0).validate("x"), Errc::ConfigError);
    EXPECT_ERRC(Distribution::lognormal(1.0, -0.1).validate("x"), Errc::ConfigError);
    LatencyModel m;
    EXPECT_DOUBLE_EQ(m.warm_overhead, 0.010);
    EXPECT_DOUBLE_EQ(m.rent_overhead, 0.010);
    EXPECT_DOUBLE_EQ(m.restore_startup, 0.040);
    EXPECT_DOUBLE_EQ(m.sched_decision, 15e-6);
    m.validate();
    m.sched_decision = 0.0;
    EXPECT_ERRC(m.validate(), Errc::ConfigError);
}

}  // namespace
}  // namespace pagurus
