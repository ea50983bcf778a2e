#pragma once

// Deterministic discrete-event simulation of one node under a policy.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "pagurus/audit.hpp"
#include "pagurus/broker.hpp"
#include "pagurus/container.hpp"
#include "pagurus/latency.hpp"
#include "pagurus/lifecycle.hpp"
#include "pagurus/manifest.hpp"
#include "pagurus/metrics.hpp"
#include "pagurus/queueing.hpp"
#include "pagurus/random.hpp"
#include "pagurus/workload.hpp"

namespace pagurus {

enum class Policy {
    OpenWhisk,
    Restore,
    Pagurus,
    RestorePlusPagurus,
    CatalyzerLikePlusPagurus,
    PrewarmForAll,
    PrewarmForEach,
};

inline const std::vector<Policy>& all_policies() {
    static const std::vector<Policy> p{Policy::OpenWhisk,          Policy::Restore,
                                       Policy::Pagurus,            Policy::RestorePlusPagurus,
                                       Policy::CatalyzerLikePlusPagurus, Policy::PrewarmForAll,
                                       Policy::PrewarmForEach};
    return p;
}

constexpr const char* to_string(Policy p) noexcept {
    switch (p) {
    case Policy::OpenWhisk: return "openwhisk";
    case Policy::Restore: return "restore";
    case Policy::Pagurus: return "pagurus";
    case Policy::RestorePlusPagurus: return "restore+pagurus";
    case Policy::CatalyzerLikePlusPagurus: return "catalyzer+pagurus";
    case Policy::PrewarmForAll: return "prewarm-all";
    case Policy::PrewarmForEach: return "prewarm-each";
    }
    return "?";
}

inline Policy policy_from_string(std::string_view s) {
    for (Policy p : all_policies())
        if (s == to_string(p)) return p;
    fail(Errc::ConfigError, "unknown policy '" + std::string(s) + "'");
}

inline bool shares_containers(Policy p) noexcept {
    return p == Policy::Pagurus || p == Policy::RestorePlusPagurus || p == Policy::CatalyzerLikePlusPagurus;
}

struct ActionQos {
    double latency_target = 1.0;
    double required_percentile = 0.95;
    bool operator==(const ActionQos&) const = default;
};

struct FleetConfig {
    Timeouts timeouts{};                // three-pool policies
    double single_timeout = 60.0;       // every other policy
    double container_memory_mb = 256.0;
    int renter_cap = 2;
    int lender_cap = 3;  // idle lenders an action may hold at once
    int renter_pool_size = 2;
    std::optional<Caps> caps;
    double idle_eval_period = 1.0;
    // Half a period off the whole-second grid, so that promotions (and the
    // lender expiries T3 later) never tie with arrivals on integer seconds.
    double idle_eval_offset = 0.5;
    double repack_period = 60.0;
    double repack_offset = 30.0;
    double rate_window = 60.0;
    std::size_t r_real_window = 200;
    bool reseed_each_epoch = true;
    bool origin_reclaim = true;
    bool shared_action_nl_draw = true;
    DiscriminantForm form = DiscriminantForm::Consistent;
    int cold_cap = std::numeric_limits<int>::max();
    std::map<std::string, int> container_cap;  // per action; queries queue beyond it
    std::map<std::string, int> pinned_warm;    // always-on executants per action
    double prewarm_boot = 2.0;                 // generic stem cell boot time
    BuildCosts build_costs{};
    bool keep_queries = true;
    bool keep_audit_records = false;
    bool check_invariants = false;
    bool operator==(const FleetConfig&) const = default;
};

struct Scenario {
    std::vector<LibraryManifest> manifests;
    std::vector<ActionQos> qos;  // indexed like manifests
    LatencyModel latency;
    WorkloadSpec workload;
    FleetConfig fleet;

    ActionId id_of(std::string_view name) const {
        for (ActionId a = 0; a < manifests.size(); ++a)
            if (manifests[a].action == name) return a;
        fail(Errc::UnknownAction, "no action named '" + std::string(name) + "'");
    }
};

inline void validate(const Scenario& s) {
    require(!s.manifests.empty(), Errc::ConfigError, "scenario has no actions");
    require(s.qos.size() == s.manifests.size(), Errc::ConfigError, "one qos entry per action");
    require(s.latency.per_action.size() == s.manifests.size(), Errc::ConfigError, "one timing entry per action");
    s.latency.validate();
    for (std::size_t i = 0; i < s.qos.size(); ++i) {
        const auto& q = s.qos[i];
        const auto& who = s.manifests[i].action;
        require(q.latency_target > 0.0, Errc::ConfigError, who + ": latency target must be positive");
        require(q.required_percentile > 0.0 && q.required_percentile < 1.0, Errc::ConfigError,
                who + ": required percentile must lie in (0,1)");
        require(q.latency_target > s.latency.per_action[i].exec_time.mean(), Errc::ConfigError,
                who + ": latency target must exceed the mean execution time");
    }
    require(s.workload.duration > 0.0, Errc::ConfigError, "duration must be positive");
    for (const auto& l : s.workload.loads) {
        s.id_of(l.action);
        l.process.validate("load of " + l.action);
    }
    validate(s.fleet.timeouts);
    require(s.fleet.single_timeout > 0.0, Errc::ConfigError, "timeout must be positive");
    require(s.fleet.renter_cap >= 0, Errc::ConfigError, "renter cap must be non-negative");
    require(s.fleet.lender_cap >= 1, Errc::ConfigError, "lender cap must be at least 1");
    require(s.fleet.renter_pool_size >= 1, Errc::ConfigError, "renter pool size must be at least 1");
    require(s.fleet.idle_eval_period > 0.0 && s.fleet.repack_period > 0.0 && s.fleet.rate_window > 0.0,
            Errc::ConfigError, "periods must be positive");
    require(s.fleet.repack_offset >= 0.0 && s.fleet.idle_eval_offset >= 0.0, Errc::ConfigError,
            "offsets must be non-negative");
    require(s.fleet.cold_cap >= 1, Errc::ConfigError, "cold-start cap must be at least 1");
    for (const auto& [name, cap] : s.fleet.container_cap) {
        s.id_of(name);
        require(cap >= 1, Errc::ConfigError, name + ": container cap must be at least 1");
    }
    for (const auto& [name, k] : s.fleet.pinned_warm) {
        s.id_of(name);
        require(k >= 0, Errc::ConfigError, name + ": pinned count must be non-negative");
    }
}

/// Hash of everything that shapes the arrival sequence.
inline std::uint64_t workload_fingerprint(const Scenario& s) {
    std::uint64_t h = derive_seed(0x9E37ULL, s.workload.seed, std::bit_cast<std::uint64_t>(s.workload.duration));
    for (const auto& l : s.workload.loads) {
        const auto& p = l.process;
        h = derive_seed(h, l.action, static_cast<int>(p.kind));
        for (double v : {p.rate, p.low, p.peak, p.period, p.offset, p.multiplier, p.burst_start, p.burst_end})
            h = derive_seed(h, std::bit_cast<std::uint64_t>(v));
    }
    return h;
}

/// Majority version of every library across the manifests (ties go to the
/// lexicographically greater version): the one image a shared prewarm pool
/// can offer.
inline LibrarySet generic_image(std::span<const LibraryManifest> all) {
    std::map<std::string, std::map<std::string, int>> votes;
    for (const auto& m : all)
        for (const auto& [lib, v] : m.libraries) ++votes[lib][v];
    LibrarySet image;
    for (const auto& [lib, versions] : votes) {
        const std::string* best = nullptr;
        int best_n = 0;
        for (const auto& [v, n] : versions)
            if (n >= best_n) best = &v, best_n = n;
        image[lib] = *best;
    }
    return image;
}

enum class EventKind { Arrival, StartupDone, ExecDone, RecycleSweep, RepackEpoch, RepackDone, RentHandoff, IdleEval };

constexpr const char* to_string(EventKind k) noexcept {
    switch (k) {
    case EventKind::Arrival: return "arrival";
    case EventKind::StartupDone: return "startup-done";
    case EventKind::ExecDone: return "exec-done";
    case EventKind::RecycleSweep: return "recycle-sweep";
    case EventKind::RepackEpoch: return "repack-epoch";
    case EventKind::RepackDone: return "repack-done";
    case EventKind::RentHandoff: return "rent-handoff";
    case EventKind::IdleEval: return "idle-eval";
    }
    return "?";
}

struct SimEvent {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::Arrival;
    std::uint64_t a = 0;  // action, container or plan slot
    std::uint64_t b = 0;  // query slot or epoch index

    bool operator>(const SimEvent& o) const noexcept {
        return time != o.time ? time > o.time : seq > o.seq;
    }
};

class Simulator {
public:
    Simulator(Policy policy, Scenario scenario)
        : policy_(policy), s_(std::move(scenario)) {
        validate(s_);
        n_ = static_cast<ActionId>(s_.manifests.size());
        // with nothing rentable, lending is pointless: the policy degenerates to OpenWhisk
        sharing_ = shares_containers(policy_) && s_.fleet.renter_cap > 0;
        const Timeouts t = sharing_ ? s_.fleet.timeouts
                                    : Timeouts{s_.fleet.single_timeout, s_.fleet.single_timeout,
                                               s_.fleet.single_timeout};
        fleet_ = Fleet(n_, t, s_.fleet.container_memory_mb);
        std::vector<std::string> names;
        std::vector<double> targets;
        for (ActionId a = 0; a < n_; ++a) {
            names.push_back(s_.manifests[a].action);
            targets.push_back(s_.qos[a].latency_target);
        }
        audit_ = AuditLog(names, s_.fleet.keep_audit_records);
        recorder_.emplace(names, targets, s_.fleet.r_real_window, s_.fleet.keep_queries);
        BrokerOptions bo;
        bo.caps = s_.fleet.caps;
        bo.renter_pool_size = s_.fleet.renter_pool_size;
        bo.shared_action_nl_draw = s_.fleet.shared_action_nl_draw;
        bo.origin_reclaim = s_.fleet.origin_reclaim;
        bo.build_costs = s_.fleet.build_costs;
        bo.handoff_latency = s_.latency.rent_overhead;
        broker_.emplace(s_.manifests, bo);
        dispatch_.rent_enabled = sharing_ && s_.fleet.renter_cap > 0;
        dispatch_.renter_cap = s_.fleet.renter_cap;
        dispatch_.cold_cap = s_.fleet.cold_cap;
        caps_.assign(n_, std::numeric_limits<int>::max());
        for (const auto& [name, cap] : s_.fleet.container_cap) caps_[s_.id_of(name)] = cap;
        queued_.resize(n_);
        windows_.resize(n_);
        exec_total_.assign(n_, 0.0);
        exec_count_.assign(n_, 0);
        if (policy_ == Policy::PrewarmForAll) {
            const auto image = generic_image(s_.manifests);
            for (const auto& m : s_.manifests) prewarm_ok_.push_back(is_subset(m.libraries, image));
        }
    }

    MetricsReport run() {
        const double end = s_.workload.duration;
        const std::uint64_t seed = s_.workload.seed;
        // arrival streams
        streams_.resize(n_);
        for (const auto& l : s_.workload.loads) {
            const ActionId a = s_.id_of(l.action);
            auto times = sample_arrivals(l.process, end, derive_seed(seed, "load", l.action));
            auto& st = streams_[a];
            st.insert(st.end(), times.begin(), times.end());
        }
        for (auto& st : streams_) std::sort(st.begin(), st.end());
        next_arrival_.assign(n_, 0);
        for (ActionId a = 0; a < n_; ++a)
            if (!streams_[a].empty()) push(streams_[a][0], EventKind::Arrival, a, 0);

        for (const auto& [name, k] : s_.fleet.pinned_warm)
            for (int i = 0; i < k; ++i) add_pinned(s_.id_of(name));
        if (policy_ == Policy::PrewarmForEach)
            for (ActionId a = 0; a < n_; ++a) add_pinned(a);
        if (policy_ == Policy::PrewarmForAll) {
            stem_ = fleet_.create_unowned(0.0);
            recorder_->launched(kNoAction, "prewarm");
        }
        standing_ = 0;
        for (const auto& c : fleet_.all()) standing_ += c.pinned;
        recorder_->containers(0.0, fleet_.live_count());

        if (sharing_) {
            if (s_.fleet.idle_eval_offset <= end) push(s_.fleet.idle_eval_offset, EventKind::IdleEval, 0, 1);
            if (s_.fleet.repack_offset <= end) push(s_.fleet.repack_offset, EventKind::RepackEpoch, 0, 0);
        }

        double now = 0.0;
        while (!events_.empty()) {
            const SimEvent ev = events_.top();
            events_.pop();
            const bool periodic = ev.kind == EventKind::IdleEval || ev.kind == EventKind::RepackEpoch ||
                                  ev.kind == EventKind::RecycleSweep;
            if (periodic && ev.time > end) continue;
            now = ev.time;
            hash_event(ev);
            ++processed_;
            handle(ev);
            recorder_->containers(now, fleet_.live_count());
            if (s_.fleet.check_invariants) {
                if (auto bad = fleet_.check_invariants())
                    fail(Errc::IllegalTransition, "pool invariant broken at t=" + std::to_string(now) + ": " + *bad);
            }
        }

        auto report = recorder_->finalize(std::max(now, end), s_.fleet.container_memory_mb);
        report.policy = to_string(policy_);
        report.seed = seed;
        report.workload_fingerprint = workload_fingerprint(s_);
        report.duration = end;
        report.standing_memory_mb = static_cast<double>(standing_) * s_.fleet.container_memory_mb;
        for (std::size_t k = 0; k < kAuditKinds; ++k) {
            const auto kind = static_cast<AuditKind>(k);
            report.audit[to_string(kind)] = audit_.count(kind);
        }
        report.audit_violations = audit_.violations();
        report.in_flight = report.arrivals - report.completions;
        report.rejected = 0;
        report.events = processed_;
        report.trace_hash = hash_;
        return report;
    }

    const AuditLog& audit() const noexcept { return audit_; }
    const Fleet& fleet() const noexcept { return fleet_; }
    const Broker& broker() const noexcept { return *broker_; }

private:
    struct Query {
        ActionId action = 0;
        std::uint32_t index = 0;
        double arrival = 0.0;
        double start = 0.0;    // when a container was assigned
        double startup = 0.0;  // startup component of the latency
        double exec = 0.0;
        StartPath path = StartPath::Cold;
    };

    void push(double t, EventKind k, std::uint64_t a, std::uint64_t b) { events_.push({t, seq_++, k, a, b}); }

    void hash_event(const SimEvent& ev) {
        hash_ = derive_seed(hash_, std::bit_cast<std::uint64_t>(ev.time), static_cast<int>(ev.kind), ev.a, ev.b);
    }

    void add_pinned(ActionId a) {
        const auto id = fleet_.create(a, 0.0);
        auto& c = fleet_.at(id);
        transition(c, ContainerEvent::BootDone);
        c.resident_code = a;
        c.pinned = true;
        recorder_->launched(a, "pinned");
    }

    Rng query_rng(const char* what, ActionId a, std::uint32_t index) const {
        return Rng(derive_seed(s_.workload.seed, what, a, index));
    }

    void handle(const SimEvent& ev) {
        switch (ev.kind) {
        case EventKind::Arrival: on_arrival(static_cast<ActionId>(ev.a), static_cast<std::uint32_t>(ev.b), ev.time); break;
        case EventKind::StartupDone: on_startup(ev.a, ev.b, ev.time); break;
        case EventKind::RentHandoff: begin_exec(ev.a, ev.b, ev.time); break;
        case EventKind::ExecDone: on_exec_done(ev.a, ev.b, ev.time); break;
        case EventKind::RecycleSweep: on_sweep(ev.time); break;
        case EventKind::IdleEval: on_idle_eval(static_cast<std::int64_t>(ev.b), ev.time); break;
        case EventKind::RepackEpoch: on_repack(ev.b, ev.time); break;
        case EventKind::RepackDone: on_repack_done(ev.a); break;
        }
    }

    std::uint64_t new_query(ActionId a, std::uint32_t index, double now) {
        Query q;
        q.action = a;
        q.index = index;
        q.arrival = now;
        Rng rng = query_rng("exec", a, index);
        q.exec = s_.latency.per_action[a].exec_time.sample(rng);
        if (!free_queries_.empty()) {
            const auto slot = free_queries_.back();
            free_queries_.pop_back();
            queries_[slot] = q;
            return slot;
        }
        queries_.push_back(q);
        return queries_.size() - 1;
    }

    void on_arrival(ActionId a, std::uint32_t index, double now) {
        // next arrival of the same action
        auto& cursor = next_arrival_[a];
        ++cursor;
        if (cursor < streams_[a].size()) push(streams_[a][cursor], EventKind::Arrival, a, cursor);

        recorder_->arrival(a);
        queued_[a].push_back(new_query(a, index, now));
        pump(a, now);
    }

    // Every query waits in its action's FIFO queue until a container takes
    // it: an idle one, a rented lender, or one that finishes booting or
    // executing. A new container is started only while the queue is longer
    // than the number of boots already in flight.
    void pump(ActionId a, double now) {
        auto& waiting = queued_[a];
        const double sched = s_.latency.sched_decision;
        while (!waiting.empty()) {
            const auto slot = waiting.front();
            auto& q = queries_[slot];
            if (policy_ == Policy::PrewarmForAll && stem_ && prewarm_ok_[a] && !has_idle(a, now)) {
                waiting.pop_front();
                const auto id = *stem_;
                stem_.reset();
                fleet_.adopt(id, a);
                auto& c = fleet_.at(id);
                c.resident_code = a;
                c.last_used_at = now;
                detail::start_invoke(fleet_, id, a, now, &audit_);
                push(now + s_.fleet.prewarm_boot, EventKind::StartupDone, kStemSlot, kStemSlot);
                q.path = StartPath::Warm;
                launch_query(slot, id, now, s_.latency.warm_overhead + sched);
                continue;
            }

            DispatchOptions opt = dispatch_;
            opt.container_cap = caps_[a];
            opt.cold_cap = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(dispatch_.cold_cap), waiting.size()));
            const auto out = dispatch(fleet_, sharing_ ? &*broker_ : nullptr, a, now, opt, &audit_);
            if (out.kind == DispatchKind::Enqueue) break;
            if (out.kind == DispatchKind::Cold) {
                start_boot(out.container, q.index, now);
                continue;
            }
            waiting.pop_front();
            if (out.kind == DispatchKind::Warm) {
                q.path = StartPath::Warm;
                launch_query(slot, out.container, now, s_.latency.warm_overhead + sched);
            } else {
                q.path = StartPath::Rent;
                q.start = now;
                q.startup = out.handoff_latency + sched;
                push(now + q.startup, EventKind::RentHandoff, out.container, slot);
            }
        }
        touch(a);
    }

    // The boot time is drawn from the stream of the query that triggered it.
    void start_boot(ContainerId id, std::uint32_t index, double now) {
        const ActionId a = fleet_.at(id).owner;
        Boot b{StartPath::Cold, now};
        double startup;
        std::string kind;
        if (policy_ == Policy::Restore || policy_ == Policy::RestorePlusPagurus) {
            startup = s_.latency.restore_startup;
            b.path = StartPath::Restore;
            kind = "restore";
        } else if (policy_ == Policy::CatalyzerLikePlusPagurus) {
            startup = s_.latency.catalyzer_startup;
            b.path = StartPath::Restore;
            kind = "catalyzer";
        } else {
            Rng rng = query_rng("cold", a, index);
            startup = s_.latency.per_action[a].cold_startup.sample(rng);
            kind = "cold";
        }
        recorder_->launched(a, kind);
        if (boots_.size() <= id) boots_.resize(id + 1);
        boots_[id] = b;
        push(now + startup + s_.latency.sched_decision, EventKind::StartupDone, id, 0);
    }

    // Warm start: the container is already Busy.
    void launch_query(std::uint64_t slot, ContainerId id, double now, double startup) {
        auto& q = queries_[slot];
        q.start = now;
        q.startup = startup;
        push(now + startup + q.exec, EventKind::ExecDone, id, slot);
    }

    bool has_idle(ActionId a, double now) {
        const auto& pools = fleet_.pools(a);
        for (const auto* pool : {&pools.executant, &pools.renter})
            for (ContainerId id : *pool) {
                const auto& c = fleet_.at(id);
                if ((c.state == ContainerState::Executant || c.state == ContainerState::Renter) &&
                    !fleet_.expired(c, now))
                    return true;
            }
        return false;
    }

    void on_startup(std::uint64_t container, std::uint64_t tag, double now) {
        if (tag == kStemSlot) {
            stem_ = fleet_.create_unowned(now);
            recorder_->launched(kNoAction, "prewarm");
            return;
        }
        const ActionId a = fleet_.at(container).owner;
        auto& waiting = queued_[a];
        if (waiting.empty()) {
            // the query it was started for went elsewhere
            finish_boot(fleet_, container, now, &audit_, false);
            schedule_expiry(fleet_.at(container));
            touch(a);
            return;
        }
        const auto next = waiting.front();
        waiting.pop_front();
        finish_boot(fleet_, container, now, &audit_);
        auto& q = queries_[next];
        q.path = boots_[container].path;
        q.start = std::max(q.arrival, boots_[container].started);
        q.startup = now - q.start;
        begin_exec(container, next, now);
    }

    void begin_exec(std::uint64_t container, std::uint64_t slot, double now) {
        push(now + queries_[slot].exec, EventKind::ExecDone, container, slot);
    }

    void on_exec_done(std::uint64_t container, std::uint64_t slot, double now) {
        const Query q = queries_[slot];
        free_queries_.push_back(slot);
        QueryRecord rec;
        rec.action = q.action;
        rec.index = q.index;
        rec.arrival = q.arrival;
        rec.wait = q.start - q.arrival;
        rec.startup = q.startup;
        rec.exec = q.exec;
        rec.latency = now - q.arrival;
        rec.path = q.path;
        recorder_->complete(rec);
        exec_total_[q.action] += q.exec;
        ++exec_count_[q.action];
        auto& w = windows_[q.action];
        w.push_back({now, q.arrival, q.exec});

        finish_query(fleet_, container);
        auto& c = fleet_.at(container);
        const ActionId owner = c.owner;
        auto& waiting = queued_[owner];
        if (!waiting.empty()) {
            const auto next = waiting.front();
            waiting.pop_front();
            detail::start_invoke(fleet_, container, owner, now, &audit_);
            queries_[next].path = StartPath::Warm;
            launch_query(next, container, now, s_.latency.warm_overhead + s_.latency.sched_decision);
        } else {
            schedule_expiry(c);
        }
        touch(owner);
    }

    void schedule_expiry(const Container& c) {
        if (c.pinned) return;
        const double timeout = fleet_.timeout_for(c);
        double at = c.last_used_at + timeout;
        while (at - c.last_used_at < timeout) at = std::nextafter(at, std::numeric_limits<double>::infinity());
        push(at, EventKind::RecycleSweep, c.id, 0);
    }

    void on_sweep(double now) {
        recycle_sweep(fleet_, now, &audit_);
    }

    void on_idle_eval(std::int64_t epoch, double now) {
        push(now + s_.fleet.idle_eval_period, EventKind::IdleEval, 0, static_cast<std::uint64_t>(epoch + 1));
        for (ActionId a = 0; a < n_; ++a) consider_lending(a, epoch, now);
    }

    void consider_lending(ActionId a, std::int64_t epoch, double now) {
        auto& pools = fleet_.pools(a);
        const auto n = static_cast<int>(pools.serving());
        if (n < 2 || exec_count_[a] == 0 || static_cast<int>(pools.lender.size()) >= s_.fleet.lender_cap) return;
        const auto r_real = recorder_->r_real(a);
        if (!r_real) return;

        auto& w = windows_[a];
        while (!w.empty() && w.front().completed < now - s_.fleet.rate_window) w.pop_front();
        const double span = std::min(s_.fleet.rate_window, now);
        RateEstimate est;
        if (w.empty()) {
            // nothing finished recently: treat as nearly idle
            est.arrival_rate = 0.5 / span;
            est.service_rate = static_cast<double>(exec_count_[a]) / exec_total_[a];
        } else {
            obs_.clear();
            for (const auto& o : w) obs_.push_back({o.arrival, o.exec});
            est = estimate_rates(obs_, span);
        }
        const QueueModel model{est.arrival_rate, est.service_rate, n};
        const ActionQos& target = s_.qos[a];
        if (model.traffic_density() >= 1.0 || target.latency_target <= 1.0 / est.service_rate) return;
        const QosSpec qos{target.latency_target, target.required_percentile, *r_real};

        const auto id = identify_idle(fleet_, a, model, qos, epoch, s_.fleet.form);
        if (!id) return;
        auto plan = broker_->current_plan(a);
        if (!plan) {
            broker_->notify_idle(a);
            pools.last_lend_epoch = std::numeric_limits<std::int64_t>::min();
            return;
        }
        broker_->notify_idle(a);
        promote_to_lender(fleet_, *broker_, *id, plan, now, &audit_);
        schedule_expiry(fleet_.at(*id));
        touch(a);
    }

    void on_repack(std::uint64_t epoch, double now) {
        const double next = now + s_.fleet.repack_period;
        if (next <= s_.workload.duration) push(next, EventKind::RepackEpoch, 0, epoch + 1);
        // every action that has lent before is re-planned, not only the
        // ones that reported an idle container since the last epoch
        std::vector<ActionId> holding;
        for (ActionId a = 0; a < n_; ++a)
            if (!fleet_.pools(a).lender.empty() || broker_->current_plan(a)) holding.push_back(a);
        const std::uint64_t seed = s_.fleet.reseed_each_epoch ? derive_seed(s_.workload.seed, "epoch", epoch)
                                                              : derive_seed(s_.workload.seed, "epoch");
        for (auto& plan : broker_->repack_epoch(seed, holding)) {
            const double ready = now + plan.build_time_estimate;
            pending_plans_.push_back(std::move(plan));
            push(ready, EventKind::RepackDone, pending_plans_.size() - 1, 0);
        }
    }

    void on_repack_done(std::uint64_t slot) {
        const auto rec = broker_->commit(pending_plans_[slot]);
        refresh_lenders(fleet_, *broker_, rec);
    }

    void touch(ActionId a) {
        const auto& p = fleet_.pools(a);
        recorder_->action_containers(a, p.executant.size() + p.renter.size() + p.lender.size());
    }

    struct Boot {
        StartPath path = StartPath::Cold;
        double started = 0.0;
    };

    struct Completion {
        double completed;
        double arrival;
        double exec;
    };

    static constexpr std::uint64_t kStemSlot = std::numeric_limits<std::uint64_t>::max();

    Policy policy_;
    Scenario s_;
    ActionId n_ = 0;
    bool sharing_ = false;
    Fleet fleet_;
    AuditLog audit_;
    std::optional<Recorder> recorder_;
    std::optional<Broker> broker_;
    DispatchOptions dispatch_;
    std::vector<int> caps_;
    std::vector<bool> prewarm_ok_;
    std::optional<ContainerId> stem_;
    std::size_t standing_ = 0;

    std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> events_;
    std::uint64_t seq_ = 0;
    std::uint64_t processed_ = 0;
    std::uint64_t hash_ = 0xCBF29CE484222325ULL;

    std::vector<std::vector<double>> streams_;
    std::vector<std::size_t> next_arrival_;
    std::vector<Query> queries_;
    std::vector<std::uint64_t> free_queries_;
    std::vector<std::deque<std::uint64_t>> queued_;
    std::vector<std::deque<Completion>> windows_;
    std::vector<Observation> obs_;
    std::vector<double> exec_total_;
    std::vector<std::uint64_t> exec_count_;
    std::vector<RepackPlan> pending_plans_;
    std::vector<Boot> boots_;  // by container id
};

inline MetricsReport run(Policy policy, const Scenario& scenario) { return Simulator(policy, scenario).run(); }

}  // namespace pagurus
