// pagurus-sim: run scenarios, experiment sweeps and fixture generation.
//
// Exit codes: 0 success, 1 runtime failure, 2 config or manifest error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pagurus/experiments.hpp"
#include "pagurus/fixture.hpp"
#include "pagurus/report_io.hpp"
#include "pagurus/scenario.hpp"

namespace fs = std::filesystem;
using namespace pagurus;

namespace {

enum class LogLevel { Off, Audit, Debug };

LogLevel log_level() {
    const char* v = std::getenv("PAGURUS_SIM_LOG");
    if (!v || !*v) return LogLevel::Off;
    const std::string s(v);
    if (s == "audit") return LogLevel::Audit;
    if (s == "debug") return LogLevel::Debug;
    if (s != "off") std::fprintf(stderr, "warning: PAGURUS_SIM_LOG='%s' is not off|audit|debug; logging off\n", v);
    return LogLevel::Off;
}

// Load errors are reported and turned into exit code 2 by main().
struct LoadFailure {
    std::string message;
};

ScenarioConfig load(const std::string& path) {
    try {
        return load_scenario_file(path);
    } catch (const Error& e) {
        throw LoadFailure{e.what()};
    } catch (const YAML::Exception& e) {
        throw LoadFailure{path + ": " + e.what()};
    }
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::vector<Policy> pick_policies(const std::string& flag, const ScenarioConfig& cfg) {
    if (flag == "all") return all_policies();
    if (!flag.empty()) {
        try {
            return {policy_from_string(flag)};
        } catch (const Error& e) {
            throw LoadFailure{std::string("--policy: ") + e.what()};
        }
    }
    if (!cfg.policies.empty()) return cfg.policies;
    return {Policy::Pagurus};
}

std::string sanitize(std::string name) {
    for (char& c : name)
        if (c == '+') c = '_';
    return name;
}

int cmd_run(const std::string& config, const std::string& policy, std::optional<std::uint64_t> seed,
            const fs::path& out_dir) {
    auto cfg = load(config);
    const auto policies = pick_policies(policy, cfg);
    const auto seeds = seed ? std::vector<std::uint64_t>{*seed} : cfg.seeds;
    const LogLevel log = log_level();
    for (std::uint64_t sd : seeds) {
        Scenario s = cfg.scenario;
        s.workload.seed = sd;
        s.fleet.keep_audit_records = log == LogLevel::Audit;
        for (Policy p : policies) {
            Simulator sim(p, s);
            const auto report = sim.run();
            const std::string stem = sanitize(to_string(p)) + "-seed" + std::to_string(sd);
            write_file(out_dir / (stem + ".json"), write_report(report, 2) + "\n");
            std::cout << format_table(report) << "\n";
            if (log == LogLevel::Audit) {
                std::string lines;
                for (const auto& r : sim.audit().records()) lines += format_audit_line(r) + "\n";
                write_file(out_dir / (stem + ".audit.log"), lines);
            }
            if (log == LogLevel::Debug)
                std::fprintf(stderr, "[debug] policy=%s seed=%llu arrivals=%llu events=%llu violations=%llu trace=%016llx\n",
                             to_string(p), static_cast<unsigned long long>(sd),
                             static_cast<unsigned long long>(report.arrivals),
                             static_cast<unsigned long long>(report.events),
                             static_cast<unsigned long long>(report.audit_violations), static_cast<unsigned long long>(report.trace_hash));
        }
    }
    return 0;
}

std::vector<std::string> sweep_targets(const ScenarioConfig& cfg) {
    if (!cfg.sweep.targets.empty()) return cfg.sweep.targets;
    std::vector<std::string> out;
    for (const auto& m : cfg.scenario.manifests) out.push_back(m.action);
    return out;
}

std::string sweep_elimination(const ScenarioConfig& cfg, std::uint64_t seed) {
    EliminationOptions opt;
    opt.invocations = cfg.sweep.invocations;
    opt.interval = cfg.sweep.interval;
    opt.warmup = cfg.sweep.warmup;
    opt.lender_erlangs = cfg.sweep.lender_erlangs;
    opt.seed = seed;
    std::string setups = "target\tlender_a\tlender_b\trate\tavoided\tcold_in_baseline\n";
    std::string summary = "target\tkind\trate\tsetups_with_rent\taudit_violations\n";
    for (const auto& t : sweep_targets(cfg)) {
        const auto r = experiment_elimination(cfg.scenario, t, opt);
        for (const auto& s : r.setups)
            setups += detail::format("%s\t%s\t%s\t%.4f\t%llu\t%llu\n", t.c_str(), s.lenders[0].c_str(),
                                     s.lenders[1].c_str(), s.rate, static_cast<unsigned long long>(s.avoided),
                                     static_cast<unsigned long long>(s.cold_in_baseline));
        const bool l = cfg.scenario.manifests[cfg.scenario.id_of(t)].action_l();
        summary += detail::format("%s\t%s\t%.4f\t%.4f\t%llu\n", t.c_str(), l ? "L" : "NL", r.rate, r.setup_fraction,
                                  static_cast<unsigned long long>(r.audit_violations));
    }
    return setups + "\n" + summary;
}

std::string sweep_burst(const ScenarioConfig& cfg, std::uint64_t seed) {
    BurstOptions opt;
    opt.multipliers = cfg.sweep.multipliers;
    opt.lender_erlangs = cfg.sweep.lender_erlangs;
    opt.warmup = cfg.sweep.warmup;
    opt.window = cfg.sweep.window;
    opt.replicates = cfg.sweep.replicates;
    opt.seed = seed;
    std::string points = "target\trenter_cap\tmultiplier\twithin\tok\tqueries\trents\tcolds\n";
    std::string summary = "target\trenter_cap\tbase_rate\tlenders\tsupported\tprovisioned\tavoided\tsaving_mb\n";
    for (const auto& t : sweep_targets(cfg)) {
        for (int cap : cfg.sweep.renter_caps) {
            const auto r = experiment_burst(cfg.scenario, t, cap, opt);
            for (const auto& p : r.points)
                points += detail::format("%s\t%d\t%g\t%.4f\t%d\t%llu\t%llu\t%llu\n", t.c_str(), cap, p.multiplier,
                                         p.within, p.ok ? 1 : 0, static_cast<unsigned long long>(p.queries),
                                         static_cast<unsigned long long>(p.rents),
                                         static_cast<unsigned long long>(p.colds));
            summary += detail::format("%s\t%d\t%.4f\t%s+%s\t%g\t%d\t%lld\t%.0f\n", t.c_str(), cap, r.base_rate,
                                      r.lenders.first.c_str(), r.lenders.second.c_str(), r.supported, r.provisioned,
                                      static_cast<long long>(r.avoided_containers), r.memory_saving_mb);
        }
    }
    return points + "\n" + summary;
}

std::string sweep_breakdown(const ScenarioConfig& cfg, std::uint64_t seed) {
    std::string out = "action\tstartup_s\texec_s\tother_s\tlatency_s\tstartup_fraction\texec_fraction\n";
    for (const auto& r : experiment_latency_breakdown(cfg.scenario, cfg.sweep.invocations, seed))
        out += detail::format("%s\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\n", r.action.c_str(), r.startup, r.exec, r.other,
                              r.latency, r.startup_fraction, r.exec_fraction);
    return out;
}

std::string sweep_container_count(const ScenarioConfig& cfg, std::uint64_t seed) {
    StepOptions opt;
    opt.erlangs = cfg.sweep.step_erlangs;
    opt.duration = cfg.sweep.step_duration;
    opt.seed = seed;
    std::string out =
        "qps\tlaunches\tpeak\tp95\tr_real\tanalytic\tmanual\tmanual_launches\tmanual_p95\tmanual_r_real\n";
    for (const auto& p : experiment_container_count(cfg.scenario, cfg.sweep.step_action, opt))
        out += detail::format("%.4f\t%llu\t%llu\t%.4f\t%.4f\t%d\t%d\t%llu\t%.4f\t%.4f\n", p.qps,
                              static_cast<unsigned long long>(p.launches), static_cast<unsigned long long>(p.peak),
                              p.p95, p.r_real, p.analytic, p.manual,
                              static_cast<unsigned long long>(p.manual_launches), p.manual_p95, p.manual_r_real);
    return out;
}

int cmd_sweep(const std::string& config, const std::string& experiment, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
    const auto cfg = load(config);
    const std::uint64_t sd = seed.value_or(cfg.seeds.front());
    std::string table;
    try {
        if (experiment == "elimination") table = sweep_elimination(cfg, sd);
        else if (experiment == "burst") table = sweep_burst(cfg, sd);
        else if (experiment == "latency-breakdown") table = sweep_breakdown(cfg, sd);
        else table = sweep_container_count(cfg, sd);
    } catch (const Error& e) {
        // the scenario loaded but does not fit the experiment (too few actions, unknown target)
        if (e.code() == Errc::ConfigError || e.code() == Errc::UnknownAction || e.code() == Errc::InvalidParam)
            throw LoadFailure{config + ": " + e.what()};
        throw;
    }
    std::cout << table;
    if (!out_dir.empty()) write_file(fs::path(out_dir) / (experiment + ".tsv"), table);
    return 0;
}

int cmd_fixture(bool empty, bool as_scenario, const std::string& out) {
    std::string text;
    if (as_scenario) {
        ScenarioConfig cfg;
        cfg.scenario = fixture_scenario(empty ? fixture::empty_benchmarks() : fixture::benchmarks());
        cfg.scenario.fleet.keep_queries = false;
        text = scenario_to_yaml(cfg);
    } else {
        text = "# 11-action benchmark fixture. The library sets are APPROXIMATIONS: the real\n"
               "# per-benchmark dependency lists were never published. vid and img share an\n"
               "# imaging library, md and mr carry libraries no other action uses.\n"
               "# name\tL|NL\tlib=version,...\n";
        text += format_manifests(empty ? fixture::empty_benchmarks() : fixture::benchmarks());
    }
    if (out.empty()) std::cout << text;
    else write_file(out, text);
    return 0;
}

int cmd_check(const std::string& config, bool dump) {
    const auto cfg = load(config);
    const auto& s = cfg.scenario;
    std::size_t l = 0;
    for (const auto& m : s.manifests) l += m.action_l();
    if (dump) {
        std::cout << scenario_to_yaml(cfg);
        return 0;
    }
    std::printf("%s: ok (%zu actions, %zu action-L, %zu loads, %.0f s, %zu seed(s))\n", config.c_str(),
                s.manifests.size(), l, s.workload.loads.size(), s.workload.duration, cfg.seeds.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Container-sharing scheduler simulator"};
    app.require_subcommand(1);

    std::string config, policy, out_dir, experiment, fixture_out;
    std::optional<std::uint64_t> seed;
    bool empty = false, benchmarks = false, as_scenario = false, dump = false;

    auto* run = app.add_subcommand("run", "Simulate a scenario under one or more policies");
    run->add_option("--config", config, "Scenario document (YAML)")->required();
    run->add_option("--policy", policy, "Policy name, or 'all'");
    run->add_option("--seed", seed, "Override the scenario seed(s)");
    run->add_option("--out", out_dir, "Directory for report files")->default_val("pagurus-out");

    auto* sweep = app.add_subcommand("sweep", "Run an experiment driver over a scenario");
    sweep->add_option("--config", config, "Scenario document (YAML)")->required();
    sweep->add_option("--experiment", experiment, "Experiment to run")
        ->required()
        ->check(CLI::IsMember({"elimination", "burst", "latency-breakdown", "container-count"}));
    sweep->add_option("--seed", seed, "Override the scenario seed");
    sweep->add_option("--out", out_dir, "Also write <experiment>.tsv here");

    auto* fix = app.add_subcommand("fixture", "Print the benchmark manifest fixture");
    fix->add_flag("--benchmarks", benchmarks, "The 11-action benchmark set (default)");
    fix->add_flag("--empty", empty, "The same actions with no extra libraries");
    fix->add_flag("--scenario", as_scenario, "Emit a full scenario document instead of a manifest file");
    fix->add_option("--out", fixture_out, "Write to this file instead of stdout");

    auto* check = app.add_subcommand("check", "Validate a scenario document");
    check->add_option("--config", config, "Scenario document (YAML)")->required();
    check->add_flag("--dump", dump, "Print the fully expanded scenario as YAML");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config, policy, seed, out_dir);
        if (*sweep) return cmd_sweep(config, experiment, seed, out_dir);
        if (*fix) {
            if (empty && benchmarks) {
                std::cerr << "error: --benchmarks and --empty are exclusive\n";
                return 2;
            }
            return cmd_fixture(empty, as_scenario, fixture_out);
        }
        if (*check) return cmd_check(config, dump);
    } catch (const LoadFailure& e) {
        std::cerr << "error: " << e.message << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
