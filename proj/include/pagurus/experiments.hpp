#pragma once

// Experiment drivers over the simulator: cold-start elimination across
// two-lender setups, burst support, latency breakdown, container counts
// under stepwise load, and the policy comparisons.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pagurus/fixture.hpp"
#include "pagurus/queueing.hpp"
#include "pagurus/repack.hpp"
#include "pagurus/simulator.hpp"

namespace pagurus {

/// A scenario over the given manifests with fixture timings and targets
/// for every action and no load yet.
inline Scenario fixture_scenario(std::vector<LibraryManifest> manifests, std::uint64_t seed = 1) {
    Scenario s;
    for (const auto& m : manifests) {
        s.latency.per_action.push_back(fixture::action_timing(m.action));
        s.qos.push_back({fixture::latency_target(m.action), fixture::kRequiredPercentile});
    }
    s.manifests = std::move(manifests);
    s.fleet.build_costs = fixture::build_costs();
    s.workload.seed = seed;
    return s;
}

inline Scenario fixture_scenario(std::uint64_t seed = 1) { return fixture_scenario(fixture::benchmarks(), seed); }

/// Arrival rate that keeps `erlangs` containers of the action busy on average.
inline double erlang_rate(const Scenario& s, const std::string& action, double erlangs) {
    return erlangs / s.latency.per_action[s.id_of(action)].exec_time.mean();
}

struct EliminationOptions {
    int invocations = 100;
    double interval = 60.0;
    double warmup = 300.0;  // background load runs alone before the first target query
    double lender_erlangs = 1.0;  // Poisson background load on each lender, rate x mean exec
    Policy policy = Policy::Pagurus;
    std::uint64_t seed = 1;
    bool keep_setups = true;
};

struct EliminationSetup {
    std::string lenders[2];
    double rate = 0.0;
    std::uint64_t avoided = 0;
    std::uint64_t cold_in_baseline = 0;
};

struct EliminationResult {
    std::string target;
    double rate = 0.0;                 // over all invocations of all setups
    double setup_fraction = 0.0;       // setups with at least one avoided cold start
    std::vector<EliminationSetup> setups;
    std::uint64_t audit_violations = 0;
};

/// Runs the target once every `interval` seconds next to every pair of the
/// other actions under background load, each paired with an OpenWhisk
/// replay of the same workload.
inline EliminationResult experiment_elimination(const Scenario& base, const std::string& target,
                                                const EliminationOptions& opt = {}) {
    base.id_of(target);
    std::vector<std::string> others;
    for (const auto& m : base.manifests)
        if (m.action != target) others.push_back(m.action);
    require(others.size() >= 2, Errc::ConfigError, "elimination needs at least two actions besides " + target);

    const auto background = [&](const std::string& lender) { return erlang_rate(base, lender, opt.lender_erlangs); };
    EliminationResult out;
    out.target = target;
    std::uint64_t avoided = 0, denom = 0;
    int covered_setups = 0, setup_index = 0;
    for (std::size_t i = 0; i < others.size(); ++i) {
        for (std::size_t j = i + 1; j < others.size(); ++j, ++setup_index) {
            Scenario s = base;
            s.workload.seed = derive_seed(opt.seed, "setup", target, setup_index);
            s.workload.duration = opt.warmup + opt.interval * opt.invocations;
            s.workload.loads = {{target, ArrivalProcess::fixed_interval(opt.interval, opt.warmup)},
                                {others[i], ArrivalProcess::poisson(background(others[i]))},
                                {others[j], ArrivalProcess::poisson(background(others[j]))}};
            s.fleet.keep_queries = true;
            const auto baseline = run(Policy::OpenWhisk, s);
            const auto r = run(opt.policy, s);
            out.audit_violations += r.audit_violations;

            const auto t = s.id_of(target);
            std::map<std::uint32_t, StartPath> served;
            for (const auto& q : r.queries)
                if (q.action == t) served[q.index] = q.path;
            EliminationSetup e{{others[i], others[j]}};
            for (const auto& q : baseline.queries) {
                if (q.action != t || q.path != StartPath::Cold) continue;
                ++e.cold_in_baseline;
                const auto p = served.at(q.index);
                e.avoided += p == StartPath::Warm || p == StartPath::Rent;
            }
            e.rate = e.cold_in_baseline ? static_cast<double>(e.avoided) / e.cold_in_baseline : 0.0;
            avoided += e.avoided;
            denom += e.cold_in_baseline;
            covered_setups += e.avoided > 0;
            if (opt.keep_setups) out.setups.push_back(std::move(e));
        }
    }
    out.rate = denom ? static_cast<double>(avoided) / static_cast<double>(denom) : 0.0;
    out.setup_fraction = setup_index ? static_cast<double>(covered_setups) / setup_index : 0.0;
    return out;
}

struct LenderChoice {
    std::pair<std::string, std::string> lenders;
    double listed = 0.0;  // fraction of probed epochs whose plans list the target
};

/// The pair of other actions whose re-packing plans list `target` in the
/// most of `epochs` seeded epochs (earliest pair in manifest order on ties).
inline LenderChoice best_lenders(const Scenario& s, const std::string& target, std::uint64_t seed = 1,
                                 int epochs = 20) {
    s.id_of(target);
    const Caps caps = s.fleet.caps ? *s.fleet.caps : default_caps(s.manifests, s.fleet.renter_pool_size);
    std::vector<const LibraryManifest*> others;
    for (const auto& m : s.manifests)
        if (m.action != target) others.push_back(&m);
    require(others.size() >= 2, Errc::ConfigError, "need two actions besides the target");
    require(epochs >= 1, Errc::ConfigError, "need at least one epoch");
    int best = -1;
    LenderChoice out;
    for (std::size_t i = 0; i < others.size(); ++i) {
        for (std::size_t j = i + 1; j < others.size(); ++j) {
            const std::vector<const LibraryManifest*> pair{others[i], others[j]};
            int listed = 0;
            for (int k = 0; k < epochs; ++k) {
                const auto plans = select_renters_batch(pair, s.manifests, caps, derive_seed(seed, "epoch", k));
                listed += std::any_of(plans.begin(), plans.end(), [&](const auto& p) { return p.lists(target); });
            }
            if (listed > best) {
                best = listed;
                out.lenders = {others[i]->action, others[j]->action};
            }
        }
    }
    out.listed = static_cast<double>(best) / epochs;
    return out;
}

inline std::pair<std::string, std::string> compatible_lenders(const Scenario& s, const std::string& target,
                                                              std::uint64_t seed = 1) {
    return best_lenders(s, target, seed).lenders;
}

/// Largest arrival rate one container carries while meeting the action's
/// QoS target, from the M/M/1 waiting-time distribution.
inline double single_container_rate(const Scenario& s, const std::string& action) {
    const ActionId a = s.id_of(action);
    const double mu = 1.0 / s.latency.per_action[a].exec_time.mean();
    const double budget = s.qos[a].latency_target - 1.0 / mu;
    const auto meets = [&](double lambda) {
        return waiting_time_cdf({lambda, mu, 1}, budget) >= s.qos[a].required_percentile;
    };
    double lo = 0.0, hi = mu;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid > 0.0 && meets(mid) ? lo : hi) = mid;
    }
    return lo;
}

struct BurstOptions {
    std::vector<double> multipliers{1, 1.5, 2, 2.5, 3, 4, 5, 6, 8, 10, 12};
    double lender_erlangs = 1.0;  // each background lender
    double warmup = 300.0;
    double window = 30.0;         // burst length
    double drain = 30.0;
    int replicates = 5;           // seeds pooled per point
    std::optional<std::pair<std::string, std::string>> lenders;  // default: compatible_lenders
    int max_provisioned = 64;
    std::uint64_t seed = 1;
};

struct BurstPoint {
    double multiplier = 1.0;
    double within = 0.0;  // burst-window queries meeting the latency target, all replicates
    bool ok = false;
    std::uint64_t queries = 0;
    std::uint64_t rents = 0;
    std::uint64_t colds = 0;
};

struct BurstResult {
    std::string target;
    int renter_cap = 0;
    double base_rate = 0.0;
    std::pair<std::string, std::string> lenders;
    std::vector<BurstPoint> points;
    double supported = 0.0;  // largest multiplier with every smaller one also passing; 0 if none
    // OpenWhisk with `provisioned` always-on containers for the target is the
    // cheapest setup that passes the supported burst; -1 when none up to the
    // limit does
    int provisioned = -1;
    std::int64_t avoided_containers = 0;  // peak containers, provisioned OpenWhisk minus this run
    double memory_saving_mb = 0.0;
    std::uint64_t audit_violations = 0;  // over every run above
};

namespace detail {

inline Scenario burst_scenario(const Scenario& base, const std::string& target, double base_rate,
                               const std::pair<std::string, std::string>& lenders, double multiplier,
                               int replicate, const BurstOptions& opt) {
    Scenario s = base;
    s.workload.seed = derive_seed(opt.seed, "burst", target, replicate);
    s.workload.duration = opt.warmup + opt.window + opt.drain;
    s.workload.loads = {
        {target, ArrivalProcess::burst(base_rate, multiplier, opt.warmup, opt.warmup + opt.window)},
        {lenders.first, ArrivalProcess::poisson(erlang_rate(base, lenders.first, opt.lender_erlangs))},
        {lenders.second, ArrivalProcess::poisson(erlang_rate(base, lenders.second, opt.lender_erlangs))}};
    s.fleet.keep_queries = true;
    return s;
}

inline void add_window(BurstPoint& p, std::uint64_t& ok, const MetricsReport& r, const Scenario& s,
                       const std::string& target, double from, double to) {
    const ActionId t = s.id_of(target);
    for (const auto& q : r.queries) {
        if (q.action != t || q.arrival < from || q.arrival >= to) continue;
        ++p.queries;
        ok += q.latency <= s.qos[t].latency_target;
        p.rents += q.path == StartPath::Rent;
        p.colds += q.path == StartPath::Cold;
    }
}

inline void close_point(BurstPoint& p, std::uint64_t ok, const Scenario& s, const std::string& target) {
    const ActionId t = s.id_of(target);
    p.within = p.queries ? static_cast<double>(ok) / static_cast<double>(p.queries) : 1.0;
    p.ok = p.within >= s.qos[t].required_percentile;
}

}  // namespace detail

/// Sweeps the burst multiplier for `target` under Pagurus with the given
/// renter cap (with cap 0 nothing is shared). Outside the burst the target runs at the load one
/// container sustains. Also sizes the always-on OpenWhisk provisioning that
/// passes the supported burst.
inline BurstResult experiment_burst(const Scenario& base, const std::string& target, int renter_cap,
                                    const BurstOptions& opt = {}) {
    require(renter_cap >= 0, Errc::ConfigError, "renter cap must be non-negative");
    require(!opt.multipliers.empty() && std::is_sorted(opt.multipliers.begin(), opt.multipliers.end()) &&
                opt.multipliers.front() >= 1.0,
            Errc::ConfigError, "multipliers must be ascending and at least 1");
    require(opt.replicates >= 1 && opt.window > 0.0, Errc::ConfigError, "need a window and one replicate");
    BurstResult out;
    out.target = target;
    out.renter_cap = renter_cap;
    out.base_rate = single_container_rate(base, target);
    out.lenders = opt.lenders ? *opt.lenders : compatible_lenders(base, target, opt.seed);
    const double from = opt.warmup, to = opt.warmup + opt.window;

    std::uint64_t peak_sum = 0;
    bool passing = true;
    for (double m : opt.multipliers) {
        BurstPoint p;
        p.multiplier = m;
        std::uint64_t ok = 0, peaks = 0;
        Scenario s;
        for (int k = 0; k < opt.replicates; ++k) {
            s = detail::burst_scenario(base, target, out.base_rate, out.lenders, m, k, opt);
            s.fleet.renter_cap = renter_cap;
            const auto r = run(Policy::Pagurus, s);
            detail::add_window(p, ok, r, s, target, from, to);
            peaks += r.peak_containers;
            out.audit_violations += r.audit_violations;
        }
        detail::close_point(p, ok, s, target);
        out.points.push_back(p);
        passing = passing && p.ok;
        if (passing) {
            out.supported = m;
            peak_sum = peaks;
        }
    }
    if (out.supported == 0.0) return out;

    for (int k = 0; k <= opt.max_provisioned; ++k) {
        BurstPoint p;
        std::uint64_t ok = 0, peaks = 0;
        Scenario s;
        for (int rep = 0; rep < opt.replicates; ++rep) {
            s = detail::burst_scenario(base, target, out.base_rate, out.lenders, out.supported, rep, opt);
            if (k > 0) s.fleet.pinned_warm[target] = k;
            const auto r = run(Policy::OpenWhisk, s);
            detail::add_window(p, ok, r, s, target, from, to);
            peaks += r.peak_containers;
            out.audit_violations += r.audit_violations;
        }
        detail::close_point(p, ok, s, target);
        if (!p.ok) continue;
        out.provisioned = k;
        // mean peak over the replicates, rounded to whole containers
        out.avoided_containers = std::llround((static_cast<double>(peaks) - static_cast<double>(peak_sum)) / opt.replicates);
        out.memory_saving_mb = static_cast<double>(out.avoided_containers) * base.fleet.container_memory_mb;
        break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// latency breakdown

struct BreakdownRow {
    std::string action;
    double startup = 0.0;  // mean seconds
    double exec = 0.0;
    double other = 0.0;    // waiting and scheduling
    double latency = 0.0;
    double startup_fraction = 0.0;
    double exec_fraction = 0.0;
};

/// Every action alone under OpenWhisk, once a minute, so that every query
/// pays a cold startup; reports how the end-to-end latency splits.
inline std::vector<BreakdownRow> experiment_latency_breakdown(const Scenario& base, int invocations = 100,
                                                              std::uint64_t seed = 1) {
    require(invocations >= 1, Errc::ConfigError, "need at least one invocation");
    std::vector<BreakdownRow> rows;
    for (const auto& m : base.manifests) {
        Scenario s = base;
        s.workload.seed = derive_seed(seed, "breakdown", m.action);
        s.workload.duration = 60.0 * invocations;
        s.workload.loads = {{m.action, ArrivalProcess::fixed_interval(60.0)}};
        s.fleet.keep_queries = false;
        const auto r = run(Policy::OpenWhisk, s);
        const auto& a = r.action(m.action);
        BreakdownRow row{m.action, a.mean_startup, a.mean_exec};
        row.latency = a.mean_latency;
        row.other = std::max(0.0, row.latency - row.startup - row.exec);
        row.startup_fraction = row.latency > 0.0 ? row.startup / row.latency : 0.0;
        row.exec_fraction = row.latency > 0.0 ? row.exec / row.latency : 0.0;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// containers launched under stepwise load

/// Fewest containers for which the M/M/n waiting time stays within the
/// target minus one mean execution at the required percentile; 0 if the
/// load is not sustainable at all.
inline int analytic_containers(double lambda, double mu, const ActionQos& qos, int max_n = 256) {
    const double budget = qos.latency_target - 1.0 / mu;
    if (budget <= 0.0) return 0;
    for (int n = 1; n <= max_n; ++n) {
        const QueueModel m{lambda, mu, n};
        if (m.traffic_density() >= 1.0) continue;
        if (waiting_time_cdf(m, budget) >= qos.required_percentile) return n;
    }
    return 0;
}

struct StepOptions {
    std::vector<double> erlangs{0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 5, 6};
    double duration = 600.0;
    int max_containers = 64;
    std::uint64_t seed = 1;
};

struct StepPoint {
    double qps = 0.0;
    // OpenWhisk scaling
    std::uint64_t launches = 0;
    std::uint64_t peak = 0;
    double p95 = 0.0;
    double r_real = 0.0;
    // manual scheduling: the fewest containers meeting the target in this run
    int analytic = 0;
    int manual = 0;  // 0 when no cap up to the limit meets the target
    std::uint64_t manual_launches = 0;
    double manual_p95 = 0.0;
    double manual_r_real = 0.0;
};

/// Steps the action through increasing Poisson loads. At each step it
/// compares OpenWhisk scaling with the smallest per-action container cap
/// that still meets the target.
inline std::vector<StepPoint> experiment_container_count(const Scenario& base, const std::string& action,
                                                         const StepOptions& opt = {}) {
    const ActionId a = base.id_of(action);
    const double mu = 1.0 / base.latency.per_action[a].exec_time.mean();
    std::vector<StepPoint> out;
    for (std::size_t i = 0; i < opt.erlangs.size(); ++i) {
        Scenario s = base;
        const double lambda = opt.erlangs[i] * mu;
        s.workload.seed = derive_seed(opt.seed, "step", action, static_cast<std::uint64_t>(i));
        s.workload.duration = opt.duration;
        s.workload.loads = {{action, ArrivalProcess::poisson(lambda)}};
        s.fleet.keep_queries = false;

        StepPoint p;
        p.qps = lambda;
        const auto ow = run(Policy::OpenWhisk, s);
        const auto& st = ow.action(action);
        p.launches = st.launches;
        p.peak = st.peak_containers;
        p.p95 = st.p95;
        p.r_real = st.r_real;
        p.analytic = analytic_containers(lambda, mu, s.qos[a]);

        for (int n = std::max(1, static_cast<int>(std::ceil(opt.erlangs[i]))); n <= opt.max_containers; ++n) {
            Scenario capped = s;
            capped.fleet.container_cap[action] = n;
            const auto r = run(Policy::OpenWhisk, capped);
            const auto& m = r.action(action);
            if (m.r_real < s.qos[a].required_percentile) continue;
            p.manual = n;
            p.manual_launches = m.launches;
            p.manual_p95 = m.p95;
            p.manual_r_real = m.r_real;
            break;
        }
        out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// policy comparisons on the once-a-minute workload

struct ComparisonOptions {
    int invocations = 100;
    double interval = 60.0;
    double warmup = 300.0;
    double lender_erlangs = 1.0;
    std::uint64_t seed = 1;
};

/// The target once every `interval` seconds next to its two most compatible
/// lenders under background load.
inline Scenario comparison_scenario(const Scenario& base, const std::string& target,
                                    const std::pair<std::string, std::string>& lenders,
                                    const ComparisonOptions& opt) {
    Scenario s = base;
    s.workload.seed = derive_seed(opt.seed, "compare", target);
    s.workload.duration = opt.warmup + opt.interval * opt.invocations;
    s.workload.loads = {{target, ArrivalProcess::fixed_interval(opt.interval, opt.warmup)},
                        {lenders.first, ArrivalProcess::poisson(erlang_rate(base, lenders.first, opt.lender_erlangs))},
                        {lenders.second, ArrivalProcess::poisson(erlang_rate(base, lenders.second, opt.lender_erlangs))}};
    s.fleet.keep_queries = true;
    return s;
}

struct PolicyLatency {
    Policy policy = Policy::OpenWhisk;
    double mean = 0.0;   // target end-to-end, seconds
    double p95 = 0.0;
    double elimination = 0.0;  // of the OpenWhisk replay's cold queries
    std::uint64_t rents = 0, colds = 0;
    double standing_memory_mb = 0.0;
    std::uint64_t audit_violations = 0;
};

struct ComparisonRow {
    std::string target;
    std::pair<std::string, std::string> lenders;
    double listed = 0.0;  // share of probed epochs whose plans list the target
    std::vector<PolicyLatency> policies;
    double warm_optimal = 0.0;  // mean with one always-warm container
    // rent-served queries: mean latency over the same queries in the
    // always-warm run, minus one
    std::optional<double> rent_overhead;

    // some lender plan lists the target in every probed epoch
    bool lender_available() const { return listed >= 1.0; }

    const PolicyLatency& at(Policy p) const {
        for (const auto& x : policies)
            if (x.policy == p) return x;
        fail(Errc::ConfigError, std::string("policy not in comparison: ") + to_string(p));
    }
};

inline ComparisonRow experiment_comparison(const Scenario& base, const std::string& target,
                                           const std::vector<Policy>& policies,
                                           const ComparisonOptions& opt = {}) {
    ComparisonRow row;
    row.target = target;
    const auto choice = best_lenders(base, target, opt.seed);
    row.lenders = choice.lenders;
    row.listed = choice.listed;
    const Scenario s = comparison_scenario(base, target, row.lenders, opt);
    const ActionId t = s.id_of(target);
    const auto target_queries = [t](const MetricsReport& r) {
        std::map<std::uint32_t, const QueryRecord*> m;
        for (const auto& q : r.queries)
            if (q.action == t) m[q.index] = &q;
        return m;
    };

    const auto baseline = run(Policy::OpenWhisk, s);
    Scenario warm_s = s;
    warm_s.fleet.pinned_warm[target] = 1;
    const auto warm = run(Policy::OpenWhisk, warm_s);
    row.warm_optimal = warm.action(target).mean_latency;
    const auto warm_q = target_queries(warm);

    for (Policy p : policies) {
        const auto r = p == Policy::OpenWhisk ? baseline : run(p, s);
        const auto& st = r.action(target);
        PolicyLatency x{p, st.mean_latency, st.p95};
        x.elimination = elimination_rate(r, baseline, target);
        x.rents = st.count(StartPath::Rent);
        x.colds = st.count(StartPath::Cold);
        x.standing_memory_mb = r.standing_memory_mb;
        x.audit_violations = r.audit_violations;
        row.policies.push_back(x);

        if (p == Policy::Pagurus && x.rents > 0) {
            double rented = 0.0, optimal = 0.0;
            for (const auto& [i, q] : target_queries(r)) {
                if (q->path != StartPath::Rent) continue;
                rented += q->latency;
                optimal += warm_q.at(i)->latency;
            }
            row.rent_overhead = rented / optimal - 1.0;
        }
    }
    return row;
}

}  // namespace pagurus
