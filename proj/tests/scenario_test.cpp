#include "pagurus/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/expect_errc.hpp"

namespace pagurus {
namespace {

std::string message_of(const std::string& text) {
    try {
        load_scenario_text(text, "cfg.yaml");
    } catch (const Error& e) {
        return e.what();
    }
    return "no error";
}

TEST(ScenarioLoad, FixtureDefaultsMatchTheBuiltInScenario) {
    const auto cfg = load_scenario_text("fixture: benchmarks\nseed: 4\nduration: 900\n");
    const auto ref = fixture_scenario(4);
    ASSERT_EQ(cfg.scenario.manifests.size(), 11u);
    for (std::size_t i = 0; i < ref.manifests.size(); ++i) {
        EXPECT_EQ(cfg.scenario.manifests[i].action, ref.manifests[i].action);
        EXPECT_EQ(cfg.scenario.manifests[i].libraries, ref.manifests[i].libraries);
        EXPECT_EQ(cfg.scenario.qos[i].latency_target, ref.qos[i].latency_target);
        EXPECT_EQ(cfg.scenario.latency.per_action[i].exec_time.mean(), ref.latency.per_action[i].exec_time.mean());
    }
    EXPECT_EQ(cfg.seeds, std::vector<std::uint64_t>{4});
    EXPECT_EQ(cfg.scenario.workload.duration, 900.0);
    EXPECT_TRUE(cfg.policies.empty());
    EXPECT_FALSE(cfg.scenario.fleet.keep_queries);
}

TEST(ScenarioLoad, InlineActionsAndSections) {
    const auto cfg = load_scenario_text(R"(
seeds: [3, 5]
policies: [openwhisk, restore+pagurus]
actions:
  - name: a
    libraries: {numpy: 1.19.5, Pillow: null}
    exec: {exponential: 0.5}
    qos: {target: 4, percentile: 0.9}
    load: {poisson: 1.5}
  - name: b
    exec: {uniform: {lo: 0.1, hi: 0.3}}
    load: {fixed_interval: {period: 60, offset: 30}}
latency: {rent_overhead: 0.02}
fleet:
  renter_cap: 1
  caps: {action_l: 2, action_nl: 1}
  pinned_warm: {a: 1}
  discriminant: literal
)");
    const auto& s = cfg.scenario;
    ASSERT_EQ(s.manifests.size(), 2u);
    EXPECT_TRUE(s.manifests[0].action_l());
    EXPECT_EQ(s.manifests[0].libraries.at("Pillow"), std::string(kLatestVersion));
    EXPECT_FALSE(s.manifests[1].action_l());
    EXPECT_EQ(s.qos[0].latency_target, 4.0);
    EXPECT_EQ(s.qos[0].required_percentile, 0.9);
    EXPECT_DOUBLE_EQ(s.qos[1].latency_target, 1.0);  // five mean executions
    EXPECT_EQ(s.workload.loads.size(), 2u);
    EXPECT_EQ(s.workload.loads[1].process.offset, 30.0);
    EXPECT_EQ(s.latency.rent_overhead, 0.02);
    EXPECT_EQ(s.fleet.renter_cap, 1);
    ASSERT_TRUE(s.fleet.caps);
    EXPECT_EQ(s.fleet.caps->action_nl, 1);
    EXPECT_EQ(s.fleet.pinned_warm.at("a"), 1);
    EXPECT_EQ(s.fleet.form, DiscriminantForm::Literal);
    EXPECT_EQ(cfg.policies, (std::vector<Policy>{Policy::OpenWhisk, Policy::RestorePlusPagurus}));
    EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 5}));
}

TEST(ScenarioLoad, ErrorsCiteTheOffendingLine) {
    EXPECT_EQ(message_of("fixture: benchmarks\nfleet:\n  lender_cap: 0\n"),
              "ConfigError: cfg.yaml:3:15: fleet.lender_cap must be an integer >= 1");
    EXPECT_EQ(message_of("fixture: benchmarks\n\nbogus: 1\n"), "ConfigError: cfg.yaml:3:1: unknown key 'bogus' in the document");
    EXPECT_EQ(message_of("actions:\n  - name: a\n    exec: {exponential: 1}\n    qos: {target: 0.5}\n"),
              "ConfigError: cfg.yaml:2:5: a: latency target must exceed the mean execution time");
    EXPECT_EQ(message_of("fixture: benchmarks\nactions:\n  - name: vid\n    load: {poisson: -1}\n"),
              "ConfigError: cfg.yaml:4:21: vid.load.poisson must be positive");
    EXPECT_EQ(message_of("fixture: benchmarks\nfleet:\n  timeouts: {renter: 90}\n"),
              "ConfigError: cfg.yaml:3:13: timeouts must satisfy 0 < T1 <= T2 <= T3");
    EXPECT_NE(message_of("actions: [\n").find("cfg.yaml:2:"), std::string::npos);
}

TEST(ScenarioLoad, RejectsInconsistentDocuments) {
    EXPECT_ERRC(load_scenario_text("{}"), Errc::ConfigError);
    EXPECT_ERRC(load_scenario_text("fixture: benchmarks\nmanifests: x.tsv\n"), Errc::ConfigError);
    EXPECT_ERRC(load_scenario_text("fixture: other\n"), Errc::ConfigError);
    EXPECT_ERRC(load_scenario_text("fixture: benchmarks\npolicies: [fastest]\n"), Errc::ConfigError);
    EXPECT_ERRC(load_scenario_text("fixture: benchmarks\nfleet: {pinned_warm: {zz: 1}}\n"), Errc::ConfigError);
    EXPECT_ERRC(load_scenario_text("fixture: benchmarks\nsweep: {targets: [zz]}\n"), Errc::ConfigError);
    EXPECT_ERRC(load_scenario_text("fixture: benchmarks\nsweep: {multipliers: [3, 2]}\n"), Errc::ConfigError);
    EXPECT_ERRC(load_scenario_text("actions:\n  - {name: a}\n  - {name: a}\n"), Errc::ConfigError);
    EXPECT_ERRC(load_scenario_text("seed: 1\nseeds: [2]\nfixture: empty\n"), Errc::ConfigError);
    EXPECT_ERRC(load_scenario_text("actions:\n  - {name: a, kind: L}\n"), Errc::MalformedManifest);
}

TEST(ScenarioLoad, ManifestFileErrorsKeepTheirLineNumber) {
    const auto dir = std::filesystem::temp_directory_path() / "pagurus_scenario_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "m.tsv") << "# header\na\tNL\t\nb\tL\n";
    try {
        load_scenario_text("manifests: m.tsv\n", "cfg.yaml", dir);
        FAIL() << "no error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MalformedManifest);
        EXPECT_NE(std::string(e.what()).find("m.tsv: line 3"), std::string::npos) << e.what();
    }
    std::ofstream(dir / "m.tsv") << "a\tNL\t\nb\tL\tnumpy=1.0\n";
    const auto cfg = load_scenario_text("manifests: m.tsv\n", "cfg.yaml", dir);
    EXPECT_EQ(cfg.scenario.manifests.size(), 2u);
}

TEST(ScenarioYaml, EmittedDocumentLoadsBackUnchanged) {
    auto cfg = load_scenario_text(R"(
fixture: benchmarks
seeds: [9]
policies: all
actions:
  - {name: vid, load: {burst: {rate: 0.4, multiplier: 3, start: 100, end: 130}}}
  - {name: dd, load: {diurnal: {low: 1, peak: 5, period: 300}}}
fleet: {container_cap: {vid: 4}, cold_cap: 3, caps: {action_l: 2, action_nl: 2}}
)");
    const auto text = scenario_to_yaml(cfg);
    const auto back = load_scenario_text(text);
    EXPECT_EQ(scenario_to_yaml(back), text);
    const auto& a = cfg.scenario;
    const auto& b = back.scenario;
    ASSERT_EQ(a.manifests.size(), b.manifests.size());
    for (std::size_t i = 0; i < a.manifests.size(); ++i) {
        EXPECT_EQ(a.manifests[i].libraries, b.manifests[i].libraries);
        EXPECT_EQ(a.manifests[i].has_extra_libraries, b.manifests[i].has_extra_libraries);
        EXPECT_EQ(a.qos[i].latency_target, b.qos[i].latency_target);
        EXPECT_EQ(a.latency.per_action[i].cold_startup.a, b.latency.per_action[i].cold_startup.a);
    }
    EXPECT_EQ(b.fleet.build_costs.per_library, a.fleet.build_costs.per_library);
    EXPECT_EQ(b.fleet.container_cap, a.fleet.container_cap);
    EXPECT_EQ(b.fleet.cold_cap, 3);
    EXPECT_EQ(back.policies, all_policies());
    // same runs from either document
    EXPECT_EQ(run(Policy::Pagurus, a).trace_hash, run(Policy::Pagurus, b).trace_hash);
}

}  // namespace
}  // namespace pagurus
