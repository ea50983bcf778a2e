#include "pagurus/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "pagurus/random.hpp"
#include "support/expect_errc.hpp"

namespace pagurus {
namespace {

TEST(Percentile, RawNearestRank) {
    LatencyHistogram h;
    for (int i = 1; i <= 100; ++i) h.add(i);
    EXPECT_DOUBLE_EQ(h.percentile(0.95), 95.0);
    EXPECT_DOUBLE_EQ(h.percentile(0.50), 50.0);
    EXPECT_DOUBLE_EQ(percentile(h, 0.99), 99.0);
}

TEST(Percentile, AllEqualSamples) {
    LatencyHistogram raw, bucketed(false);
    for (int i = 0; i < 1000; ++i) {
        raw.add(0.37);
        bucketed.add(0.37);
    }
    for (double q : {0.01, 0.5, 0.95, 0.999}) {
        EXPECT_DOUBLE_EQ(raw.percentile(q), 0.37);
        EXPECT_DOUBLE_EQ(bucketed.percentile(q), 0.37);
    }
}

TEST(Percentile, BucketedExponentialQuantile) {
    LatencyHistogram h(false);
    Rng rng(17);
    for (int i = 0; i < 100'000; ++i) h.add(rng.exponential(1.0));
    EXPECT_FALSE(h.has_raw());
    EXPECT_NEAR(h.percentile(0.95), std::log(20.0), 0.02 * std::log(20.0));
    EXPECT_NEAR(h.percentile(0.50), std::log(2.0), 0.02 * std::log(2.0));
}

TEST(Percentile, MonotoneInQ) {
    LatencyHistogram h(false);
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) h.add(std::exp(3.0 * rng.normal() - 2.0));
    double prev = 0.0;
    for (double q = 0.01; q < 1.0; q += 0.01) {
        const double v = h.percentile(q);
        EXPECT_GE(v, prev);
        prev = v;
    }
    std::uint64_t total = 0;
    for (auto c : h.buckets()) total += c;
    EXPECT_EQ(total, 5000u);
}

TEST(Percentile, Errors) {
    LatencyHistogram h;
    EXPECT_ERRC(h.percentile(0.5), Errc::EmptyHistogram);
    EXPECT_ERRC(percentile_raw({}, 0.5), Errc::EmptyHistogram);
    h.add(1.0);
    EXPECT_ERRC(h.percentile(1.0), Errc::InvalidParam);
    EXPECT_ERRC(h.percentile(0.0), Errc::InvalidParam);
}

TEST(Histogram, BucketEdges) {
    EXPECT_DOUBLE_EQ(LatencyHistogram::edge(0), 1e-4);
    EXPECT_NEAR(LatencyHistogram::edge(100), 1e2, 1e-9);
    LatencyHistogram h;
    h.add(5e-5);
    h.add(1e-4);
    h.add(150.0);
    EXPECT_EQ(h.buckets()[0], 1u);
    EXPECT_EQ(h.buckets()[1], 1u);
    EXPECT_EQ(h.buckets()[101], 1u);
}

MetricsReport paired(std::vector<StartPath> paths, std::uint64_t peak = 3) {
    MetricsReport r;
    r.seed = 9;
    r.workload_fingerprint = 77;
    r.peak_containers = peak;
    r.actions.push_back({"a"});
    for (std::uint32_t i = 0; i < paths.size(); ++i) {
        QueryRecord q;
        q.index = i;
        q.path = paths[i];
        r.queries.push_back(q);
    }
    return r;
}

TEST(EliminationRate, AllRentedIsOne) {
    using P = StartPath;
    const auto base = paired({P::Cold, P::Cold, P::Warm, P::Cold});
    const auto run = paired({P::Rent, P::Rent, P::Warm, P::Rent});
    EXPECT_DOUBLE_EQ(elimination_rate(run, base, "a"), 1.0);
}

TEST(EliminationRate, NoSharingIsZeroAndRestoreDoesNotCount) {
    using P = StartPath;
    const auto base = paired({P::Cold, P::Cold, P::Cold});
    EXPECT_DOUBLE_EQ(elimination_rate(base, base, "a"), 0.0);
    EXPECT_DOUBLE_EQ(elimination_rate(paired({P::Restore, P::Warm, P::Cold}), base, "a"), 1.0 / 3.0);
}

TEST(EliminationRate, Errors) {
    using P = StartPath;
    const auto base = paired({P::Cold});
    EXPECT_ERRC(elimination_rate(base, paired({}), "a"), Errc::MissingBaseline);
    EXPECT_ERRC(elimination_rate(base, paired({P::Warm}), "a"), Errc::MissingBaseline);
    auto other = base;
    other.seed = 10;
    EXPECT_ERRC(elimination_rate(other, base, "a"), Errc::MismatchedRuns);
    EXPECT_ERRC(elimination_rate(base, base, "b"), Errc::UnknownAction);
}

TEST(MemorySaving, Arithmetic) {
    const auto base = paired({}, 5);
    EXPECT_DOUBLE_EQ(memory_saving(base, base), 0.0);
    EXPECT_DOUBLE_EQ(memory_saving(paired({}, 3), base), 512.0);
    auto other = base;
    other.workload_fingerprint = 1;
    EXPECT_ERRC(memory_saving(other, base), Errc::MismatchedRuns);
}

TEST(Recorder, SlidingWindowAndTotals) {
    Recorder rec({"a", "b"}, {1.0, 2.0}, 4);
    EXPECT_FALSE(rec.r_real(0));
    const auto done = [&](std::uint32_t action, double latency, StartPath p) {
        rec.arrival(action);
        QueryRecord q;
        q.action = action;
        q.latency = latency;
        q.exec = latency / 2;
        q.path = p;
        rec.complete(q);
    };
    done(0, 2.0, StartPath::Cold);  // misses
    for (int i = 0; i < 4; ++i) done(0, 0.5, StartPath::Warm);
    EXPECT_DOUBLE_EQ(*rec.r_real(0), 1.0);  // the miss left the window
    done(0, 1.5, StartPath::Rent);
    EXPECT_DOUBLE_EQ(*rec.r_real(0), 0.75);
    done(1, 1.0, StartPath::Warm);

    rec.containers(0.0, 2);
    rec.containers(10.0, 5);
    const auto r = rec.finalize(20.0, 256.0);
    EXPECT_DOUBLE_EQ(r.memory_time_mb_s, (2 * 10 + 5 * 10) * 256.0);
    EXPECT_EQ(r.peak_containers, 5u);
    EXPECT_DOUBLE_EQ(r.peak_memory_mb, 5 * 256.0);
    EXPECT_EQ(r.arrivals, 7u);
    EXPECT_EQ(r.completions, 7u);
    const auto& a = r.action("a");
    EXPECT_EQ(a.count(StartPath::Warm) + a.count(StartPath::Rent) + a.count(StartPath::Cold), a.completed);
    EXPECT_NEAR(a.r_real, 4.0 / 6.0, 1e-12);
    EXPECT_DOUBLE_EQ(a.r_real_window, 0.75);
    EXPECT_LE(a.p50, a.p95);
    EXPECT_LE(a.p95, a.p99);
    EXPECT_EQ(r.queries.size(), 7u);
}

}  // namespace
}  // namespace pagurus
