#pragma once

// YAML scenario documents for the command-line tool. The format is described
// in README.md; samples/ has complete examples. Every error names the file
// and the line of the offending node.

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pagurus/experiments.hpp"
#include "pagurus/fixture.hpp"
#include "pagurus/manifest.hpp"
#include "pagurus/simulator.hpp"

namespace pagurus {

/// Knobs for `sweep`; unset lists fall back to the experiment defaults.
struct SweepConfig {
    std::vector<std::string> targets;  // empty: every action
    int invocations = 100;
    double interval = 60.0;
    double warmup = 300.0;
    double lender_erlangs = 1.0;
    std::vector<int> renter_caps{0, 1, 2};
    std::vector<double> multipliers = BurstOptions{}.multipliers;
    double window = 30.0;
    int replicates = 5;
    std::string step_action = "vid";
    std::vector<double> step_erlangs = StepOptions{}.erlangs;
    double step_duration = 600.0;
};

struct ScenarioConfig {
    Scenario scenario;
    std::vector<Policy> policies;       // empty: every policy
    std::vector<std::uint64_t> seeds{1};
    std::string fixture;                // "benchmarks", "empty" or "" when actions are explicit
    SweepConfig sweep;
};

namespace detail {

// what() without the leading "Code: "
inline std::string bare_message(const Error& e) {
    const std::string w = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    return w.rfind(prefix, 0) == 0 ? w.substr(prefix.size()) : w;
}

class YamlReader {
public:
    explicit YamlReader(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void bad(const YAML::Node& at, const std::string& why, Errc code = Errc::ConfigError) const {
        const auto m = at.Mark();
        std::string where = origin_;
        if (!m.is_null()) where += ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
        fail(code, where + ": " + why);
    }

    void only_keys(const YAML::Node& map, std::initializer_list<const char*> allowed, const std::string& what) const {
        if (!map.IsMap()) bad(map, what + " must be a mapping");
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) bad(kv.first, "unknown key '" + key + "' in " + what);
        }
    }

    template <class T>
    T scalar(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) bad(n, what + " must be a scalar");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            bad(n, what + " has the wrong type ('" + n.Scalar() + "')");
        }
    }

    double number(const YAML::Node& n, const std::string& what,
                  const std::function<bool(double)>& ok = nullptr, const char* need = "") const {
        const double v = scalar<double>(n, what);
        if (!std::isfinite(v) || (ok && !ok(v))) bad(n, what + " " + need);
        return v;
    }

    double positive(const YAML::Node& n, const std::string& what) const {
        return number(n, what, [](double v) { return v > 0.0; }, "must be positive");
    }

    double non_negative(const YAML::Node& n, const std::string& what) const {
        return number(n, what, [](double v) { return v >= 0.0; }, "must be non-negative");
    }

    int integer(const YAML::Node& n, const std::string& what, int min) const {
        const auto v = scalar<long long>(n, what);
        if (v < min || v > std::numeric_limits<int>::max())
            bad(n, what + " must be an integer >= " + std::to_string(min));
        return static_cast<int>(v);
    }

    /// One-key mapping such as `{exponential: 0.2}`; returns the key and its value.
    std::pair<std::string, YAML::Node> tagged(const YAML::Node& n, const std::string& what) const {
        if (!n.IsMap() || n.size() != 1) bad(n, what + " must be a mapping with exactly one key");
        const auto it = n.begin();
        return {it->first.as<std::string>(), it->second};
    }

    Distribution distribution(const YAML::Node& n, const std::string& what) const {
        const auto [kind, v] = tagged(n, what);
        Distribution d;
        if (kind == "fixed") {
            d = Distribution::fixed(positive(v, what + ".fixed"));
        } else if (kind == "exponential") {
            d = Distribution::exponential(positive(v, what + ".exponential"));
        } else if (kind == "lognormal") {
            only_keys(v, {"mean", "sigma"}, what + ".lognormal");
            d = Distribution::lognormal(positive(need(v, "mean", what), what + ".mean"),
                                        non_negative(need(v, "sigma", what), what + ".sigma"));
        } else if (kind == "uniform") {
            only_keys(v, {"lo", "hi"}, what + ".uniform");
            d = Distribution::uniform(positive(need(v, "lo", what), what + ".lo"),
                                      positive(need(v, "hi", what), what + ".hi"));
        } else {
            bad(n, what + ": unknown distribution '" + kind + "' (fixed, exponential, lognormal, uniform)");
        }
        check(n, [&] { d.validate(what); });
        return d;
    }

    ArrivalProcess arrivals(const YAML::Node& n, const std::string& what) const {
        const auto [kind, v] = tagged(n, what);
        ArrivalProcess p;
        if (kind == "poisson") {
            p = ArrivalProcess::poisson(positive(v, what + ".poisson"));
        } else if (kind == "diurnal") {
            only_keys(v, {"low", "peak", "period"}, what + ".diurnal");
            p = ArrivalProcess::diurnal(non_negative(need(v, "low", what), what + ".low"),
                                        positive(need(v, "peak", what), what + ".peak"),
                                        positive(need(v, "period", what), what + ".period"));
        } else if (kind == "burst") {
            only_keys(v, {"rate", "multiplier", "start", "end"}, what + ".burst");
            p = ArrivalProcess::burst(positive(need(v, "rate", what), what + ".rate"),
                                      number(need(v, "multiplier", what), what + ".multiplier",
                                             [](double x) { return x >= 1.0; }, "must be at least 1"),
                                      non_negative(need(v, "start", what), what + ".start"),
                                      non_negative(need(v, "end", what), what + ".end"));
        } else if (kind == "fixed_interval") {
            only_keys(v, {"period", "offset"}, what + ".fixed_interval");
            p = ArrivalProcess::fixed_interval(positive(need(v, "period", what), what + ".period"),
                                               v["offset"] ? non_negative(v["offset"], what + ".offset") : 0.0);
        } else {
            bad(n, what + ": unknown arrival process '" + kind + "' (poisson, diurnal, burst, fixed_interval)");
        }
        check(n, [&] { p.validate(what); });
        return p;
    }

    YAML::Node need(const YAML::Node& map, const char* key, const std::string& what) const {
        const YAML::Node v = map[key];
        if (!v) bad(map, what + " needs '" + key + "'");
        return v;
    }

    /// Runs a library check and re-raises its error at this node.
    void check(const YAML::Node& at, const std::function<void()>& fn) const {
        try {
            fn();
        } catch (const Error& e) {
            bad(at, bare_message(e), e.code() == Errc::MalformedManifest ? e.code() : Errc::ConfigError);
        }
    }

    const std::string& origin() const noexcept { return origin_; }

private:
    std::string origin_;
};

struct ActionEntry {
    std::optional<LibraryManifest> manifest;
    std::optional<ActionTiming> timing;
    std::optional<ActionQos> qos;
    std::optional<ArrivalProcess> load;
    std::optional<YAML::Node> node;  // the `actions` entry, if any
};

inline void read_fleet(const YamlReader& r, const YAML::Node& n, FleetConfig& f) {
    r.only_keys(n,
                {"timeouts", "single_timeout", "container_memory_mb", "renter_cap", "lender_cap",
                 "renter_pool_size", "caps", "idle_eval_period", "idle_eval_offset", "repack_period",
                 "repack_offset", "rate_window", "r_real_window", "reseed_each_epoch", "origin_reclaim",
                 "shared_action_nl_draw", "discriminant", "cold_cap", "container_cap", "pinned_warm",
                 "prewarm_boot", "build_costs", "record_queries", "check_invariants"},
                "fleet");
    if (const auto t = n["timeouts"]) {
        r.only_keys(t, {"renter", "executant", "lender"}, "fleet.timeouts");
        if (t["renter"]) f.timeouts.renter = r.positive(t["renter"], "fleet.timeouts.renter");
        if (t["executant"]) f.timeouts.executant = r.positive(t["executant"], "fleet.timeouts.executant");
        if (t["lender"]) f.timeouts.lender = r.positive(t["lender"], "fleet.timeouts.lender");
        r.check(t, [&] { validate(f.timeouts); });
    }
    const auto pos = [&](const char* key, double& out) {
        if (n[key]) out = r.positive(n[key], std::string("fleet.") + key);
    };
    const auto nonneg = [&](const char* key, double& out) {
        if (n[key]) out = r.non_negative(n[key], std::string("fleet.") + key);
    };
    const auto integer = [&](const char* key, auto& out, int min) {
        if (n[key]) out = r.integer(n[key], std::string("fleet.") + key, min);
    };
    const auto flag = [&](const char* key, bool& out) {
        if (n[key]) out = r.scalar<bool>(n[key], std::string("fleet.") + key);
    };
    pos("single_timeout", f.single_timeout);
    pos("container_memory_mb", f.container_memory_mb);
    integer("renter_cap", f.renter_cap, 0);
    integer("lender_cap", f.lender_cap, 1);
    integer("renter_pool_size", f.renter_pool_size, 1);
    if (const auto c = n["caps"]) {
        r.only_keys(c, {"action_l", "action_nl"}, "fleet.caps");
        Caps caps;
        caps.action_l = r.integer(r.need(c, "action_l", "fleet.caps"), "fleet.caps.action_l", 0);
        caps.action_nl = r.integer(r.need(c, "action_nl", "fleet.caps"), "fleet.caps.action_nl", 0);
        f.caps = caps;
    }
    pos("idle_eval_period", f.idle_eval_period);
    nonneg("idle_eval_offset", f.idle_eval_offset);
    pos("repack_period", f.repack_period);
    nonneg("repack_offset", f.repack_offset);
    pos("rate_window", f.rate_window);
    if (n["r_real_window"]) f.r_real_window = static_cast<std::size_t>(r.integer(n["r_real_window"], "fleet.r_real_window", 1));
    flag("reseed_each_epoch", f.reseed_each_epoch);
    flag("origin_reclaim", f.origin_reclaim);
    flag("shared_action_nl_draw", f.shared_action_nl_draw);
    if (const auto d = n["discriminant"]) {
        const auto v = r.scalar<std::string>(d, "fleet.discriminant");
        if (v == "consistent") f.form = DiscriminantForm::Consistent;
        else if (v == "literal") f.form = DiscriminantForm::Literal;
        else r.bad(d, "fleet.discriminant must be 'consistent' or 'literal'");
    }
    integer("cold_cap", f.cold_cap, 1);
    const auto per_action = [&](const char* key, std::map<std::string, int>& out, int min) {
        const auto m = n[key];
        if (!m) return;
        if (!m.IsMap()) r.bad(m, std::string("fleet.") + key + " must map action names to counts");
        for (const auto& kv : m)
            out[kv.first.as<std::string>()] = r.integer(kv.second, std::string("fleet.") + key, min);
    };
    per_action("container_cap", f.container_cap, 1);
    per_action("pinned_warm", f.pinned_warm, 0);
    pos("prewarm_boot", f.prewarm_boot);
    if (const auto b = n["build_costs"]) {
        r.only_keys(b, {"default", "per_library"}, "fleet.build_costs");
        if (b["default"]) f.build_costs.default_cost = r.non_negative(b["default"], "fleet.build_costs.default");
        if (const auto libs = b["per_library"]) {
            if (!libs.IsMap()) r.bad(libs, "fleet.build_costs.per_library must map libraries to seconds");
            for (const auto& kv : libs)
                f.build_costs.per_library[kv.first.as<std::string>()] =
                    r.non_negative(kv.second, "build cost of " + kv.first.as<std::string>());
        }
    }
    flag("record_queries", f.keep_queries);
    flag("check_invariants", f.check_invariants);
}

inline void read_latency(const YamlReader& r, const YAML::Node& n, LatencyModel& l) {
    r.only_keys(n, {"warm_overhead", "rent_overhead", "restore_startup", "catalyzer_startup", "sched_decision"},
                "latency");
    const auto nonneg = [&](const char* key, double& out) {
        if (n[key]) out = r.non_negative(n[key], std::string("latency.") + key);
    };
    nonneg("warm_overhead", l.warm_overhead);
    nonneg("rent_overhead", l.rent_overhead);
    nonneg("restore_startup", l.restore_startup);
    nonneg("catalyzer_startup", l.catalyzer_startup);
    nonneg("sched_decision", l.sched_decision);
}

inline void read_sweep(const YamlReader& r, const YAML::Node& n, SweepConfig& s) {
    r.only_keys(n,
                {"targets", "invocations", "interval", "warmup", "lender_erlangs", "renter_caps", "multipliers",
                 "window", "replicates", "step_action", "step_erlangs", "step_duration"},
                "sweep");
    const auto list = [&](const char* key, auto& out, auto&& read) {
        const auto l = n[key];
        if (!l) return;
        if (!l.IsSequence() || l.size() == 0) r.bad(l, std::string("sweep.") + key + " must be a non-empty list");
        out.clear();
        for (const auto& x : l) out.push_back(read(x));
    };
    list("targets", s.targets, [&](const YAML::Node& x) { return r.scalar<std::string>(x, "sweep.targets"); });
    if (n["invocations"]) s.invocations = r.integer(n["invocations"], "sweep.invocations", 1);
    if (n["interval"]) s.interval = r.positive(n["interval"], "sweep.interval");
    if (n["warmup"]) s.warmup = r.non_negative(n["warmup"], "sweep.warmup");
    if (n["lender_erlangs"]) s.lender_erlangs = r.positive(n["lender_erlangs"], "sweep.lender_erlangs");
    list("renter_caps", s.renter_caps, [&](const YAML::Node& x) { return r.integer(x, "sweep.renter_caps", 0); });
    list("multipliers", s.multipliers, [&](const YAML::Node& x) {
        return r.number(x, "sweep.multipliers", [](double v) { return v >= 1.0; }, "must be at least 1");
    });
    if (!std::is_sorted(s.multipliers.begin(), s.multipliers.end())) r.bad(n["multipliers"], "sweep.multipliers must ascend");
    if (n["window"]) s.window = r.positive(n["window"], "sweep.window");
    if (n["replicates"]) s.replicates = r.integer(n["replicates"], "sweep.replicates", 1);
    if (n["step_action"]) s.step_action = r.scalar<std::string>(n["step_action"], "sweep.step_action");
    list("step_erlangs", s.step_erlangs, [&](const YAML::Node& x) { return r.positive(x, "sweep.step_erlangs"); });
    if (n["step_duration"]) s.step_duration = r.positive(n["step_duration"], "sweep.step_duration");
}

inline LibraryManifest read_libraries(const YamlReader& r, const YAML::Node& a, const std::string& name) {
    RawManifest raw;
    raw.action = name;
    if (const auto libs = a["libraries"]) {
        if (libs.IsMap()) {
            for (const auto& kv : libs) {
                std::optional<std::string> v;
                if (!kv.second.IsNull()) v = r.scalar<std::string>(kv.second, "version of " + kv.first.as<std::string>());
                raw.libraries.emplace_back(kv.first.as<std::string>(), v);
            }
        } else if (libs.IsSequence()) {
            for (const auto& x : libs) raw.libraries.emplace_back(r.scalar<std::string>(x, "library"), std::nullopt);
        } else if (!libs.IsNull()) {
            r.bad(libs, name + ": libraries must be a mapping of name to version, or a list of names");
        }
    }
    if (const auto k = a["kind"]) {
        const auto v = r.scalar<std::string>(k, name + ".kind");
        if (v != "L" && v != "NL") r.bad(k, name + ".kind must be L or NL");
        raw.declared_l = v == "L";
    }
    if (a["custom_image"]) raw.custom_image = r.scalar<bool>(a["custom_image"], name + ".custom_image");
    std::vector<LibraryManifest> out;
    r.check(a, [&] { out = ingest_manifests(std::span(&raw, 1)); });
    return out.front();
}

}  // namespace detail

/// Parses a scenario document. Relative manifest paths resolve against
/// `base_dir`; `origin` names the document in error messages.
inline ScenarioConfig load_scenario_text(const std::string& text, const std::string& origin = "<config>",
                                         const std::filesystem::path& base_dir = {}) {
    const detail::YamlReader r(origin);
    YAML::Node doc;
    try {
        doc = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        fail(Errc::ConfigError, origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                                    std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    if (!doc.IsMap()) r.bad(doc, "the document must be a mapping");
    r.only_keys(doc, {"seed", "seeds", "duration", "policies", "fixture", "manifests", "actions", "latency", "fleet", "sweep"},
                "the document");

    ScenarioConfig cfg;
    Scenario& s = cfg.scenario;
    s.fleet.keep_queries = false;

    if (doc["seed"] && doc["seeds"]) r.bad(doc["seeds"], "give either 'seed' or 'seeds'");
    if (const auto n = doc["seed"]) cfg.seeds = {r.scalar<std::uint64_t>(n, "seed")};
    if (const auto n = doc["seeds"]) {
        if (!n.IsSequence() || n.size() == 0) r.bad(n, "seeds must be a non-empty list");
        cfg.seeds.clear();
        for (const auto& x : n) cfg.seeds.push_back(r.scalar<std::uint64_t>(x, "seed"));
    }
    s.workload.seed = cfg.seeds.front();
    s.workload.duration = doc["duration"] ? r.positive(doc["duration"], "duration") : 600.0;

    if (const auto n = doc["policies"]) {
        const auto one = [&](const YAML::Node& x) {
            const auto name = r.scalar<std::string>(x, "policy");
            if (name == "all") {
                cfg.policies = all_policies();
                return;
            }
            r.check(x, [&] { cfg.policies.push_back(policy_from_string(name)); });
        };
        if (n.IsSequence()) {
            for (const auto& x : n) one(x);
        } else {
            one(n);
        }
    }

    // actions: the built-in fixture, a manifest file, or inline entries
    if (doc["fixture"] && doc["manifests"]) r.bad(doc["manifests"], "give either 'fixture' or 'manifests'");
    std::vector<std::string> order;
    std::map<std::string, detail::ActionEntry> entries;
    if (const auto n = doc["fixture"]) {
        cfg.fixture = r.scalar<std::string>(n, "fixture");
        std::vector<LibraryManifest> ms;
        if (cfg.fixture == "benchmarks") ms = fixture::benchmarks();
        else if (cfg.fixture == "empty") ms = fixture::empty_benchmarks();
        else r.bad(n, "fixture must be 'benchmarks' or 'empty'");
        for (auto& m : ms) {
            order.push_back(m.action);
            auto& e = entries[m.action];
            e.timing = fixture::action_timing(m.action);
            e.qos = ActionQos{fixture::latency_target(m.action), fixture::kRequiredPercentile};
            e.manifest = std::move(m);
        }
        s.fleet.build_costs = fixture::build_costs();
    }
    if (const auto n = doc["manifests"]) {
        const auto rel = r.scalar<std::string>(n, "manifests");
        const auto path = std::filesystem::path(rel).is_absolute() ? std::filesystem::path(rel) : base_dir / rel;
        std::ifstream in(path);
        if (!in) r.bad(n, "cannot read manifest file '" + path.string() + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        std::vector<LibraryManifest> ms;
        try {
            ms = load_manifest_text(buf.str());
        } catch (const Error& e) {
            fail(e.code(), path.string() + ": " + detail::bare_message(e));
        }
        for (auto& m : ms) {
            order.push_back(m.action);
            entries[m.action].manifest = std::move(m);
        }
    }
    if (const auto acts = doc["actions"]) {
        if (!acts.IsSequence()) r.bad(acts, "actions must be a list");
        for (const YAML::Node a : acts) {
            r.only_keys(a, {"name", "kind", "libraries", "custom_image", "qos", "cold_startup", "exec", "load"}, "an action");
            const auto name = r.scalar<std::string>(r.need(a, "name", "an action"), "name");
            auto [it, fresh] = entries.try_emplace(name);
            auto& e = it->second;
            if (e.node) r.bad(a, "action '" + name + "' is listed twice");
            if (fresh) order.push_back(name);
            e.node = a;
            if (a["libraries"] || a["kind"] || a["custom_image"] || !e.manifest)
                e.manifest = detail::read_libraries(r, a, name);
            if (const auto c = a["cold_startup"]) {
                if (!e.timing) e.timing = ActionTiming{};
                e.timing->cold_startup = r.distribution(c, name + ".cold_startup");
            }
            if (const auto x = a["exec"]) {
                if (!e.timing) e.timing = ActionTiming{};
                e.timing->exec_time = r.distribution(x, name + ".exec");
            }
            if (const auto q = a["qos"]) {
                r.only_keys(q, {"target", "percentile"}, name + ".qos");
                ActionQos qos = e.qos.value_or(ActionQos{});
                if (!q["target"] && !e.qos) qos.latency_target = 0.0;  // filled in below
                if (q["target"]) qos.latency_target = r.positive(q["target"], name + ".qos.target");
                if (q["percentile"])
                    qos.required_percentile = r.number(q["percentile"], name + ".qos.percentile",
                                                       [](double v) { return v > 0.0 && v < 1.0; }, "must lie in (0,1)");
                e.qos = qos;
            }
            if (const auto l = a["load"]) e.load = r.arrivals(l, name + ".load");
        }
    }
    if (order.empty()) r.bad(doc, "no actions: give 'fixture', 'manifests' or 'actions'");

    for (const auto& name : order) {
        auto& e = entries.at(name);
        const YAML::Node at = e.node ? *e.node : doc;
        const ActionTiming timing = e.timing.value_or(ActionTiming{});
        ActionQos qos = e.qos.value_or(ActionQos{0.0, 0.95});
        // default target: five mean executions
        if (qos.latency_target == 0.0) qos.latency_target = 5.0 * timing.exec_time.mean();
        if (!(qos.latency_target > timing.exec_time.mean()))
            r.bad(at, name + ": latency target must exceed the mean execution time");
        s.manifests.push_back(*e.manifest);
        s.latency.per_action.push_back(timing);
        s.qos.push_back(qos);
        if (e.load) s.workload.loads.push_back({name, *e.load});
    }

    if (const auto n = doc["latency"]) detail::read_latency(r, n, s.latency);
    if (const auto n = doc["fleet"]) {
        detail::read_fleet(r, n, s.fleet);
        for (const auto& [name, _] : s.fleet.container_cap)
            if (!entries.count(name)) r.bad(n["container_cap"], "container_cap names unknown action '" + name + "'");
        for (const auto& [name, _] : s.fleet.pinned_warm)
            if (!entries.count(name)) r.bad(n["pinned_warm"], "pinned_warm names unknown action '" + name + "'");
    }
    if (const auto n = doc["sweep"]) {
        detail::read_sweep(r, n, cfg.sweep);
        for (const auto& t : cfg.sweep.targets)
            if (!entries.count(t)) r.bad(n["targets"], "sweep target '" + t + "' is not an action");
        if (n["step_action"] && !entries.count(cfg.sweep.step_action))
            r.bad(n["step_action"], "sweep.step_action '" + cfg.sweep.step_action + "' is not an action");
    }
    r.check(doc, [&] { validate(s); });
    return cfg;
}

inline ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::ConfigError, "cannot read '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario_text(buf.str(), path.string(), path.parent_path());
}

namespace detail {

inline void emit(YAML::Emitter& out, const Distribution& d) {
    out << YAML::Flow << YAML::BeginMap;
    switch (d.kind) {
    case DistKind::Fixed: out << YAML::Key << "fixed" << YAML::Value << d.a; break;
    case DistKind::Exponential: out << YAML::Key << "exponential" << YAML::Value << d.a; break;
    case DistKind::LogNormal:
        out << YAML::Key << "lognormal" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "mean"
            << YAML::Value << d.a << YAML::Key << "sigma" << YAML::Value << d.b << YAML::EndMap;
        break;
    case DistKind::Uniform:
        out << YAML::Key << "uniform" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "lo"
            << YAML::Value << d.a << YAML::Key << "hi" << YAML::Value << d.b << YAML::EndMap;
        break;
    }
    out << YAML::EndMap;
}

inline void emit(YAML::Emitter& out, const ArrivalProcess& p) {
    out << YAML::Flow << YAML::BeginMap;
    switch (p.kind) {
    case ArrivalKind::Poisson: out << YAML::Key << "poisson" << YAML::Value << p.rate; break;
    case ArrivalKind::Diurnal:
        out << YAML::Key << "diurnal" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "low"
            << YAML::Value << p.low << YAML::Key << "peak" << YAML::Value << p.peak << YAML::Key << "period"
            << YAML::Value << p.period << YAML::EndMap;
        break;
    case ArrivalKind::Burst:
        out << YAML::Key << "burst" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "rate"
            << YAML::Value << p.rate << YAML::Key << "multiplier" << YAML::Value << p.multiplier << YAML::Key
            << "start" << YAML::Value << p.burst_start << YAML::Key << "end" << YAML::Value << p.burst_end
            << YAML::EndMap;
        break;
    case ArrivalKind::FixedInterval:
        out << YAML::Key << "fixed_interval" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key
            << "period" << YAML::Value << p.period << YAML::Key << "offset" << YAML::Value << p.offset
            << YAML::EndMap;
        break;
    }
    out << YAML::EndMap;
}

}  // namespace detail

/// A self-contained document (inline actions, no fixture reference) that
/// loads back to the same scenario. Sweep settings are not written.
inline std::string scenario_to_yaml(const ScenarioConfig& cfg) {
    const Scenario& s = cfg.scenario;
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << cfg.seeds;
    out << YAML::Key << "duration" << YAML::Value << s.workload.duration;
    if (!cfg.policies.empty()) {
        out << YAML::Key << "policies" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (Policy p : cfg.policies) out << to_string(p);
        out << YAML::EndSeq;
    }
    out << YAML::Key << "actions" << YAML::Value << YAML::BeginSeq;
    for (std::size_t i = 0; i < s.manifests.size(); ++i) {
        const auto& m = s.manifests[i];
        out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << m.action;
        out << YAML::Key << "kind" << YAML::Value << (m.has_extra_libraries ? "L" : "NL");
        if (!m.libraries.empty()) {
            out << YAML::Key << "libraries" << YAML::Value << YAML::Flow << YAML::BeginMap;
            for (const auto& [lib, v] : m.libraries) out << YAML::Key << lib << YAML::Value << v;
            out << YAML::EndMap;
        }
        if (!m.repackable) out << YAML::Key << "custom_image" << YAML::Value << true;
        out << YAML::Key << "qos" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "target"
            << YAML::Value << s.qos[i].latency_target << YAML::Key << "percentile" << YAML::Value
            << s.qos[i].required_percentile << YAML::EndMap;
        out << YAML::Key << "cold_startup" << YAML::Value;
        detail::emit(out, s.latency.per_action[i].cold_startup);
        out << YAML::Key << "exec" << YAML::Value;
        detail::emit(out, s.latency.per_action[i].exec_time);
        for (const auto& l : s.workload.loads) {
            if (l.action != m.action) continue;
            out << YAML::Key << "load" << YAML::Value;
            detail::emit(out, l.process);
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    const auto& l = s.latency;
    out << YAML::Key << "latency" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "warm_overhead" << YAML::Value << l.warm_overhead;
    out << YAML::Key << "rent_overhead" << YAML::Value << l.rent_overhead;
    out << YAML::Key << "restore_startup" << YAML::Value << l.restore_startup;
    out << YAML::Key << "catalyzer_startup" << YAML::Value << l.catalyzer_startup;
    out << YAML::Key << "sched_decision" << YAML::Value << l.sched_decision;
    out << YAML::EndMap;

    const auto& f = s.fleet;
    out << YAML::Key << "fleet" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "timeouts" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "renter"
        << YAML::Value << f.timeouts.renter << YAML::Key << "executant" << YAML::Value << f.timeouts.executant
        << YAML::Key << "lender" << YAML::Value << f.timeouts.lender << YAML::EndMap;
    out << YAML::Key << "single_timeout" << YAML::Value << f.single_timeout;
    out << YAML::Key << "container_memory_mb" << YAML::Value << f.container_memory_mb;
    out << YAML::Key << "renter_cap" << YAML::Value << f.renter_cap;
    out << YAML::Key << "lender_cap" << YAML::Value << f.lender_cap;
    out << YAML::Key << "renter_pool_size" << YAML::Value << f.renter_pool_size;
    if (f.caps)
        out << YAML::Key << "caps" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "action_l"
            << YAML::Value << f.caps->action_l << YAML::Key << "action_nl" << YAML::Value << f.caps->action_nl
            << YAML::EndMap;
    out << YAML::Key << "idle_eval_period" << YAML::Value << f.idle_eval_period;
    out << YAML::Key << "idle_eval_offset" << YAML::Value << f.idle_eval_offset;
    out << YAML::Key << "repack_period" << YAML::Value << f.repack_period;
    out << YAML::Key << "repack_offset" << YAML::Value << f.repack_offset;
    out << YAML::Key << "rate_window" << YAML::Value << f.rate_window;
    out << YAML::Key << "r_real_window" << YAML::Value << f.r_real_window;
    out << YAML::Key << "reseed_each_epoch" << YAML::Value << f.reseed_each_epoch;
    out << YAML::Key << "origin_reclaim" << YAML::Value << f.origin_reclaim;
    out << YAML::Key << "shared_action_nl_draw" << YAML::Value << f.shared_action_nl_draw;
    out << YAML::Key << "discriminant" << YAML::Value
        << (f.form == DiscriminantForm::Consistent ? "consistent" : "literal");
    if (f.cold_cap != std::numeric_limits<int>::max()) out << YAML::Key << "cold_cap" << YAML::Value << f.cold_cap;
    if (!f.container_cap.empty()) out << YAML::Key << "container_cap" << YAML::Value << YAML::Flow << f.container_cap;
    if (!f.pinned_warm.empty()) out << YAML::Key << "pinned_warm" << YAML::Value << YAML::Flow << f.pinned_warm;
    out << YAML::Key << "prewarm_boot" << YAML::Value << f.prewarm_boot;
    out << YAML::Key << "build_costs" << YAML::Value << YAML::BeginMap << YAML::Key << "default" << YAML::Value
        << f.build_costs.default_cost;
    if (!f.build_costs.per_library.empty())
        out << YAML::Key << "per_library" << YAML::Value << YAML::Flow << f.build_costs.per_library;
    out << YAML::EndMap;
    out << YAML::Key << "record_queries" << YAML::Value << f.keep_queries;
    out << YAML::Key << "check_invariants" << YAML::Value << f.check_invariants;
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace pagurus
