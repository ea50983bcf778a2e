#include "pagurus/queueing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "pagurus/random.hpp"
#include "support/expect_errc.hpp"
#include "support/mmn_monte_carlo.hpp"

namespace pagurus {
namespace {

double total_mass(const QueueModel& m, std::size_t k_max) {
    const auto pi = stationary_distribution(m, k_max);
    const double head = std::accumulate(pi.begin(), pi.end(), 0.0);
    const double rho = m.traffic_density();
    // beyond k_max >= n the terms are geometric with ratio rho
    return head + pi.back() * rho / (1.0 - rho);
}

TEST(StationaryDistribution, SingleServerIsGeometric) {
    const auto pi = stationary_distribution({0.5, 1.0, 1}, 3);
    ASSERT_EQ(pi.size(), 4u);
    EXPECT_NEAR(pi[0], 0.5, 1e-12);
    EXPECT_NEAR(pi[1], 0.25, 1e-12);
    EXPECT_NEAR(pi[2], 0.125, 1e-12);
    EXPECT_NEAR(pi[3], 0.0625, 1e-12);
}

TEST(StationaryDistribution, TwoServerEmptyProbability) {
    const auto pi = stationary_distribution({1.0, 1.0, 2}, 0);
    EXPECT_NEAR(pi[0], 1.0 / 3.0, 1e-12);
}

TEST(StationaryDistribution, RejectsUnstableAndInvalid) {
    EXPECT_ERRC(stationary_distribution({2.0, 1.0, 2}, 4), Errc::UnstableQueue);
    EXPECT_ERRC(stationary_distribution({0.0, 1.0, 1}, 2), Errc::InvalidParam);
    EXPECT_ERRC(stationary_distribution({1.0, -1.0, 2}, 2), Errc::InvalidParam);
}

TEST(StationaryDistribution, MassSumsToOneOnGrid) {
    for (int n = 1; n <= 8; ++n) {
        for (int r = 1; r <= 9; ++r) {
            const double rho = r / 10.0;
            const QueueModel m{rho * n * 1.5, 1.5, n};
            EXPECT_NEAR(total_mass(m, static_cast<std::size_t>(n) + 5), 1.0, 1e-9)
                << "n=" << n << " rho=" << rho;
            EXPECT_GT(stationary_distribution(m, 0)[0], 0.0);
        }
    }
}

TEST(StationaryDistribution, LargeServerCountsStayFinite) {
    const QueueModel m{0.9 * 64 * 2.0, 2.0, 64};
    const auto pi = stationary_distribution(m, 128);
    for (double p : pi) ASSERT_TRUE(std::isfinite(p));
    EXPECT_NEAR(total_mass(m, 128), 1.0, 1e-9);
    EXPECT_GT(prob_no_wait(m), 0.0);
}

TEST(StationaryDistribution, AgreesWithMonteCarloMm4) {
    const QueueModel m{3.0, 1.0, 4};
    const auto pi = stationary_distribution(m, 20);
    testing::MmnOracleConfig cfg;
    cfg.arrival_rate = 3.0;
    cfg.servers = 4;
    cfg.k_max = 20;
    cfg.wait_points = {0.5};
    cfg.seed = 11;
    const auto mc = testing::simulate_mmn(cfg);
    for (std::size_t k = 0; k <= 20; ++k) EXPECT_NEAR(pi[k], mc.state[k].mean, 0.005) << "k=" << k;
    EXPECT_NEAR(prob_no_wait(m), mc.no_wait.mean, 0.005);
    EXPECT_NEAR(waiting_time_cdf(m, 0.5), mc.wait_cdf[0].mean, 0.005);
}

TEST(ProbNoWait, ErlangCAtUnitOfferedLoad) {
    EXPECT_NEAR(prob_no_wait({1.0, 1.0, 2}), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(prob_wait({1.0, 1.0, 2}), 1.0 / 3.0, 1e-12);
}

TEST(ProbNoWait, VanishingLoadNeverWaits) {
    EXPECT_NEAR(prob_no_wait({1e-9, 1.0, 1}), 1.0, 1e-8);
}

TEST(WaitingTimeCdf, SingleServerClosedForm) {
    EXPECT_NEAR(waiting_time_cdf({0.5, 1.0, 1}, 1.3863), 0.75, 1e-4);
    // exact algebraic identity with 1 - rho e^{-mu(1-rho)t}
    for (double rho : {0.1, 0.35, 0.8, 0.95}) {
        for (double t : {0.01, 0.5, 3.0, 40.0}) {
            const double mu = 2.5;
            const QueueModel m{rho * mu, mu, 1};
            EXPECT_NEAR(waiting_time_cdf(m, t), 1.0 - rho * std::exp(-mu * (1.0 - rho) * t), 1e-14);
        }
    }
}

TEST(WaitingTimeCdf, ContinuousAtZeroAndBounded) {
    const QueueModel m{1.0, 1.0, 2};
    EXPECT_NEAR(waiting_time_cdf(m, 1e-12), 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(waiting_time_cdf(m, 1e6), 1.0, 1e-12);
    EXPECT_THROW(waiting_time_cdf(m, 0.0), Error);
    EXPECT_THROW(waiting_time_cdf(m, -1.0), Error);
}

TEST(WaitingTimeCdf, MonotoneInTimeAndServers) {
    const double lambda = 3.0, mu = 1.0;
    for (int n = 4; n <= 10; ++n) {
        const QueueModel m{lambda, mu, n};
        double prev = prob_no_wait(m);
        for (double t = 0.05; t < 10.0; t += 0.05) {
            const double f = waiting_time_cdf(m, t);
            EXPECT_GE(f + 1e-15, prev);
            prev = f;
        }
        if (n > 4) {
            for (double t : {0.1, 0.5, 2.0})
                EXPECT_GE(waiting_time_cdf(m, t) + 1e-15, waiting_time_cdf(m.with_servers(n - 1), t));
        }
    }
}

TEST(IdleDiscriminant, LightLoadCanLend) {
    const QueueModel m{0.1, 1.0, 3};
    const QosSpec q{2.0, 0.95, 0.99};
    // oracle: two containers at t = T_D - 1/mu = 1
    const QueueModel two{0.1, 1.0, 2};
    const double rho = 0.05;
    const double pi0 = 1.0 / (1.0 + 0.1 + 0.1 * 0.1 / (2.0 * (1.0 - rho)));
    const double pi2 = 0.1 * 0.1 / 2.0 * pi0;
    const double f = 1.0 - pi2 / (1.0 - rho) * std::exp(-2.0 * (1.0 - rho) * 1.0);
    EXPECT_NEAR(waiting_time_cdf(two, 1.0), f, 1e-12);
    EXPECT_GT(f, 0.95);
    EXPECT_EQ(idle_discriminant(m, q), IdleDecision::CanLend);

    testing::MmnOracleConfig cfg;
    cfg.arrival_rate = 0.1;
    cfg.servers = 2;
    cfg.arrivals = 200'000;
    cfg.k_max = 2;
    cfg.wait_points = {1.0};
    cfg.seed = 5;
    const auto mc = testing::simulate_mmn(cfg);
    EXPECT_GT(mc.wait_cdf[0].mean, 0.95);
}

TEST(IdleDiscriminant, SingleContainerIsKept) {
    EXPECT_EQ(idle_discriminant({0.9, 1.0, 1}, {2.0, 0.95, 0.99}), IdleDecision::MustKeep);
}

TEST(IdleDiscriminant, MeasuredBelowRequiredIsViolation) {
    for (int n : {1, 2, 5}) {
        EXPECT_EQ(idle_discriminant({0.5, 1.0, n}, {2.0, 0.95, 0.90}), IdleDecision::QosViolated);
    }
}

TEST(IdleDiscriminant, RejectsBadPreconditions) {
    EXPECT_ERRC(idle_discriminant({0.5, 1.0, 2}, {0.9, 0.95, 0.99}), Errc::InvalidParam);
    EXPECT_ERRC(idle_discriminant({3.0, 1.0, 2}, {2.0, 0.95, 0.99}), Errc::UnstableQueue);
}

TEST(IdleDiscriminant, KeepsWhenReducedModelIsUnstable) {
    // 1.5 Erlangs on 2 containers is fine; on 1 it is not.
    EXPECT_EQ(idle_discriminant({1.5, 1.0, 2}, {5.0, 0.5, 0.99}), IdleDecision::MustKeep);
}

TEST(IdleDiscriminant, LiteralFormUsesNContainerTerms) {
    const QueueModel m{2.0, 1.0, 4};
    const QosSpec q{3.0, 0.9, 0.99};
    const double rho = 0.5;
    const double expected = 1.0 - 0.9 - prob_wait(m) * std::exp(-3.0 * 1.0 * (1.0 - rho) * 2.0);
    EXPECT_NEAR(discriminant_margin(m, q, DiscriminantForm::Literal), expected, 1e-14);
    EXPECT_NEAR(discriminant_margin(m, q, DiscriminantForm::Consistent),
                waiting_time_cdf(m.with_servers(3), 2.0) - 0.9, 1e-14);
}

TEST(EstimateRates, Arithmetic) {
    std::vector<Observation> w;
    for (int i = 0; i < 60; ++i) w.push_back({static_cast<double>(i), 0.2});
    auto r = estimate_rates(w, 60.0);
    EXPECT_NEAR(r.arrival_rate, 1.0, 1e-12);
    EXPECT_NEAR(r.service_rate, 5.0, 1e-9);

    const std::vector<Observation> one{{3.0, 2.0}};
    r = estimate_rates(one, 10.0);
    EXPECT_NEAR(r.arrival_rate, 0.1, 1e-12);
    EXPECT_NEAR(r.service_rate, 0.5, 1e-12);
}

TEST(EstimateRates, EmptyWindowFails) {
    EXPECT_ERRC(estimate_rates({}, 60.0), Errc::EmptyWindow);
    const std::vector<Observation> one{{0.0, 1.0}};
    EXPECT_ERRC(estimate_rates(one, 0.0), Errc::InvalidParam);
}

TEST(EstimateRates, RecoversSyntheticPoissonTrace) {
    Rng rng(99);
    std::vector<Observation> w;
    double t = 0.0;
    for (int i = 0; i < 100'000; ++i) {
        t += rng.exponential(2.0);
        w.push_back({t, rng.exponential(4.0)});
    }
    const auto r = estimate_rates(w, t);
    EXPECT_NEAR(r.arrival_rate, 2.0, 0.04);
    EXPECT_NEAR(r.service_rate, 4.0, 0.08);
}

}  // namespace
}  // namespace pagurus
