#include "pagurus/manifest.hpp"

#include <gtest/gtest.h>

#include "pagurus/fixture.hpp"
#include "support/expect_errc.hpp"

namespace pagurus {
namespace {

TEST(Ingest, KindFollowsLibraries) {
    const std::vector<RawManifest> raw{{"A", {{"numpy", "1.16"}}, {}, false, 0}, {"B", {}, {}, false, 0}};
    const auto m = ingest_manifests(raw);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_TRUE(m[0].action_l());
    EXPECT_FALSE(m[1].action_l());
}

TEST(Ingest, MissingVersionBecomesLatest) {
    const std::vector<RawManifest> raw{{"A", {{"numpy", std::nullopt}}, {}, false, 0}};
    EXPECT_EQ(ingest_manifests(raw)[0].libraries.at("numpy"), "latest");
}

TEST(Ingest, Errors) {
    const std::vector<RawManifest> dup{{"A", {}, {}, false, 0}, {"A", {}, {}, false, 0}};
    EXPECT_ERRC(ingest_manifests(dup), Errc::DuplicateAction);
    const std::vector<RawManifest> twice{{"A", {{"x", "1"}, {"x", "2"}}, {}, false, 0}};
    EXPECT_ERRC(ingest_manifests(twice), Errc::MalformedManifest);
    const std::vector<RawManifest> mislabeled{{"A", {}, true, false, 0}};
    EXPECT_ERRC(ingest_manifests(mislabeled), Errc::MalformedManifest);
}

TEST(Ingest, BenchmarkFixtureCounts) {
    const auto all = fixture::benchmarks();
    ASSERT_EQ(all.size(), 11u);
    int nl = 0;
    for (const auto& m : all) nl += !m.action_l();
    EXPECT_EQ(nl, 6);
    EXPECT_EQ(11 - nl, 5);
    for (const auto& name : fixture::action_nl_names()) EXPECT_FALSE(find_manifest(all, name)->action_l());
}

TEST(ManifestText, ParsesAllColumns) {
    const auto m = load_manifest_text(
        "# comment\n"
        "vid\tL\tPillow=8.1.0,numpy=1.19.5\n"
        "\n"
        "dd\tNL\t\n"
        "box\tL\tnumpy\tcustom-image\n");
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m[0].libraries.at("numpy"), "1.19.5");
    EXPECT_FALSE(m[1].action_l());
    EXPECT_EQ(m[2].libraries.at("numpy"), "latest");
    EXPECT_FALSE(m[2].repackable);
}

TEST(ManifestText, ErrorCitesLine) {
    try {
        load_manifest_text("a\tNL\t\nb\tX\tfoo=1\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MalformedManifest);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    try {
        load_manifest_text("a\tNL\t\n\nb\tL\t\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_ERRC(load_manifest_text("a\tNL\na\tNL\n"), Errc::DuplicateAction);
    EXPECT_ERRC(load_manifest_text("justonecolumn\n"), Errc::MalformedManifest);
}

TEST(ManifestText, FixtureRoundTrips) {
    const auto all = fixture::benchmarks();
    const auto text = format_manifests(all);
    const auto again = load_manifest_text(text);
    ASSERT_EQ(again.size(), all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(again[i].action, all[i].action);
        EXPECT_EQ(again[i].libraries, all[i].libraries);
    }
    EXPECT_EQ(format_manifests(again), text);
}

TEST(VersionConflict, LatestClashesWithPinned) {
    EXPECT_TRUE(versions_conflict({{"l1", "1.0"}}, {{"l1", "2.0"}}));
    EXPECT_TRUE(versions_conflict({{"l1", "latest"}}, {{"l1", "2.0"}}));
    EXPECT_FALSE(versions_conflict({{"l1", "latest"}}, {{"l1", "latest"}}));
    EXPECT_FALSE(versions_conflict({{"l1", "1.0"}}, {{"l2", "2.0"}}));
}

TEST(EmptyFixture, AllActionNl) {
    for (const auto& m : fixture::empty_benchmarks()) EXPECT_FALSE(m.action_l());
}

}  // namespace
}  // namespace pagurus
