#include "pagurus/broker.hpp"

#include <gtest/gtest.h>

#include "pagurus/fixture.hpp"
#include "pagurus/lifecycle.hpp"
#include "support/expect_errc.hpp"

namespace pagurus {
namespace {

TEST(RepackEpoch, NothingToPlanWithoutNotifications) {
    Broker b(fixture::benchmarks());
    EXPECT_TRUE(b.repack_epoch(1).empty());
}

TEST(RepackEpoch, ActionNlLenderWithCapsTwoTwo) {
    BrokerOptions opt;
    opt.caps = Caps{2, 2};
    Broker b(fixture::benchmarks(), opt);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        b.notify_idle(b.id_of("dd"));
        const auto plans = b.repack_epoch(seed);
        ASSERT_EQ(plans.size(), 1u);
        int l = 0, nl = 0;
        for (const auto& r : plans[0].renters) (b.manifest(b.id_of(r)).action_l() ? l : nl)++;
        EXPECT_EQ(l, 2);
        EXPECT_EQ(nl, 2);
        EXPECT_TRUE(validate_plan(plans[0], b.manifests()).empty());
    }
}

TEST(RepackEpoch, SecondIdenticalEpochHitsCache) {
    Broker b(fixture::benchmarks());
    b.notify_idle(b.id_of("vid"));
    const auto first = b.repack_epoch(42);
    ASSERT_EQ(first.size(), 1u);
    EXPECT_GT(first[0].build_time_estimate, 0.0);
    EXPECT_LE(first[0].build_time_estimate, 10.0);
    b.notify_idle(b.id_of("vid"));
    const auto second = b.repack_epoch(42);
    ASSERT_EQ(second.size(), 1u);
    EXPECT_EQ(second[0].renters, first[0].renters);
    EXPECT_EQ(second[0].union_libraries, first[0].union_libraries);
    EXPECT_EQ(second[0].build_time_estimate, 0.0);
    EXPECT_EQ(b.cache_hits(), 1u);
    EXPECT_EQ(b.rebuilds(), 1u);
}

TEST(RepackEpoch, RebuildOnlyWhenUnionChanges) {
    Broker b(fixture::benchmarks());
    const ActionId dd = b.id_of("dd");
    std::optional<LibrarySet> last;
    std::size_t expected_rebuilds = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        b.notify_idle(dd);
        const auto p = b.repack_epoch(seed).at(0);
        if (!last || *last != p.union_libraries) ++expected_rebuilds;
        EXPECT_EQ(p.build_time_estimate == 0.0, last && *last == p.union_libraries);
        last = p.union_libraries;
    }
    EXPECT_EQ(b.rebuilds(), expected_rebuilds);
    EXPECT_GT(b.cache_hits(), 0u);
}

TEST(MatchRent, ConflictingRequesterFindsNothing) {
    auto all = fixture::benchmarks();
    Broker b(all);
    Fleet fleet(all.size());
    const ActionId vid = b.id_of("vid");
    const auto c = fleet.create(vid, 0.0);
    ++fleet.pools(vid).cold_in_flight;
    finish_boot(fleet, c, 0.0);
    finish_query(fleet, c);
    b.notify_idle(vid);
    promote_to_lender(fleet, b, c, b.commit(b.repack_epoch(3).at(0)), 1.0);
    const LibrarySet odd{{"numpy", "1.16.6"}};
    EXPECT_FALSE(b.match_rent({b.id_of("mr"), 2.0, &odd}, fleet));
    EXPECT_TRUE(b.match_rent({b.id_of("img"), 2.0, &all[b.id_of("img")].libraries}, fleet));
}

TEST(Handoff, OnlyRequesterCodeSurvives) {
    auto all = fixture::benchmarks();
    Broker b(all);
    Fleet fleet(all.size());
    AuditLog audit;
    const ActionId vid = b.id_of("vid"), kms = b.id_of("kms");
    const auto c = fleet.create(vid, 0.0);
    ++fleet.pools(vid).cold_in_flight;
    finish_boot(fleet, c, 0.0);
    finish_query(fleet, c);
    b.notify_idle(vid);
    promote_to_lender(fleet, b, c, b.commit(b.repack_epoch(3).at(0)), 1.0);
    EXPECT_GE(fleet.at(c).sealed_entries.size(), 3u);
    EXPECT_EQ(fleet.at(c).resident_code, kNoAction);
    const double cost = b.handoff(fleet, vid, c, kms, 2.0, &audit);
    EXPECT_DOUBLE_EQ(cost, 0.010);
    EXPECT_EQ(fleet.at(c).resident_code, kms);
    EXPECT_TRUE(fleet.at(c).sealed_entries.empty());
    EXPECT_EQ(audit.violations(), 0u);
    EXPECT_ERRC(b.handoff(fleet, vid, c, kms, 2.0), Errc::StaleContainer);
}

TEST(AuditLog, FlagsForeignCode) {
    AuditLog log({"a", "b"}, true);
    Container c;
    c.id = 7;
    c.resident_code = 0;
    EXPECT_TRUE(log.check_access(c, 0, 1.0));
    c.resident_data = 1;
    EXPECT_FALSE(log.check_access(c, 0, 2.0));
    EXPECT_EQ(log.violations(), 1u);
    EXPECT_EQ(log.lines(), "2.000000 violation a 7 code=a,data=b\n");
}

}  // namespace
}  // namespace pagurus
