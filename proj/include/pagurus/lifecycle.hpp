#pragma once

// Intra-action scheduling: dispatch order, idle detection, lender
// promotion and timeout-driven recycling over a Fleet.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "pagurus/audit.hpp"
#include "pagurus/broker.hpp"
#include "pagurus/container.hpp"
#include "pagurus/queueing.hpp"

namespace pagurus {

enum class DispatchKind { Warm, Rent, Cold, Enqueue };

constexpr const char* to_string(DispatchKind k) noexcept {
    switch (k) {
    case DispatchKind::Warm: return "Warm";
    case DispatchKind::Rent: return "Rent";
    case DispatchKind::Cold: return "Cold";
    case DispatchKind::Enqueue: return "Enqueue";
    }
    return "?";
}

struct DispatchOutcome {
    DispatchKind kind = DispatchKind::Enqueue;
    ContainerId container = 0;
    ActionId lender = kNoAction;  // Rent only
    double handoff_latency = 0.0;
};

struct DispatchOptions {
    bool rent_enabled = true;
    int renter_cap = 2;
    int cold_cap = std::numeric_limits<int>::max();       // cold starts in flight per action
    int container_cap = std::numeric_limits<int>::max();  // serving containers per action
};

namespace detail {

inline std::optional<ContainerId> pick_idle(Fleet& fleet, const std::vector<ContainerId>& pool,
                                            ContainerState want, bool most_recent) {
    std::optional<ContainerId> best;
    double best_time = 0.0;
    for (ContainerId id : pool) {
        const auto& c = fleet.at(id);
        if (c.state != want) continue;
        const bool better = !best || (most_recent ? c.last_used_at > best_time : c.last_used_at < best_time);
        if (better) {
            best = id;
            best_time = c.last_used_at;
        }
    }
    return best;
}

inline void expire_pool(Fleet& fleet, std::vector<ContainerId> pool, double now, AuditLog* audit,
                        std::vector<ContainerId>* out = nullptr) {
    for (ContainerId id : pool) {
        const auto& c = fleet.at(id);
        if (!fleet.expired(c, now)) continue;
        const ActionId owner = c.owner;
        fleet.recycle(id);
        if (audit) audit->record(now, AuditKind::Recycle, owner, id);
        if (out) out->push_back(id);
    }
}

inline void start_invoke(Fleet& fleet, ContainerId id, ActionId action, double now, AuditLog* audit) {
    auto& c = fleet.at(id);
    transition(c, ContainerEvent::Invoke);
    c.last_used_at = now;
    c.resident_data = action;
    if (audit) {
        audit->record(now, AuditKind::Invoke, action, id);
        audit->check_access(c, action, now);
    }
}

}  // namespace detail

/// Chooses how to start one query of `action`. Warm and Rent outcomes leave
/// the container Busy; Cold leaves a new ColdStarting container that the
/// caller must boot; Enqueue means nothing was allocated.
inline DispatchOutcome dispatch(Fleet& fleet, Broker* broker, ActionId action, double now,
                                const DispatchOptions& opt = {}, AuditLog* audit = nullptr) {
    if (action >= fleet.action_count()) fail(Errc::UnknownAction, "unknown action id " + std::to_string(action));
    auto& pools = fleet.pools(action);
    detail::expire_pool(fleet, pools.renter, now, audit);
    detail::expire_pool(fleet, pools.executant, now, audit);

    if (auto id = detail::pick_idle(fleet, pools.executant, ContainerState::Executant, true)) {
        detail::start_invoke(fleet, *id, action, now, audit);
        return {DispatchKind::Warm, *id};
    }
    if (auto id = detail::pick_idle(fleet, pools.renter, ContainerState::Renter, true)) {
        detail::start_invoke(fleet, *id, action, now, audit);
        return {DispatchKind::Warm, *id};
    }
    if (opt.rent_enabled && broker && static_cast<int>(pools.renter.size()) < opt.renter_cap) {
        const RentRequest req{action, now, &broker->manifest(action).libraries};
        for (;;) {
            auto match = broker->match_rent(req, fleet);
            if (!match) break;
            if (fleet.expired(fleet.at(match->container), now)) {
                const ActionId owner = fleet.at(match->container).owner;
                fleet.recycle(match->container);
                if (audit) audit->record(now, AuditKind::Recycle, owner, match->container);
                continue;
            }
            if (audit) audit->record(now, AuditKind::Match, action, match->container, "lender=" + audit->name(match->lender));
            const double cost = broker->handoff(fleet, match->lender, match->container, action, now, audit);
            detail::start_invoke(fleet, match->container, action, now, audit);
            return {DispatchKind::Rent, match->container, match->lender, cost};
        }
    }
    if (static_cast<int>(pools.serving()) >= opt.container_cap || pools.cold_in_flight >= opt.cold_cap)
        return {DispatchKind::Enqueue};
    const ContainerId id = fleet.create(action, now);
    ++pools.cold_in_flight;
    return {DispatchKind::Cold, id};
}

/// Boot completion for a Cold outcome. With `invoke` the container starts
/// its owner's next query at once; otherwise it joins the idle executants.
/// Either way its idle clock still counts from the dispatch that created it.
inline void finish_boot(Fleet& fleet, ContainerId id, double now, AuditLog* audit = nullptr, bool invoke = true) {
    auto& c = fleet.at(id);
    transition(c, ContainerEvent::BootDone);
    c.resident_code = c.owner;
    --fleet.pools(c.owner).cold_in_flight;
    if (invoke) detail::start_invoke(fleet, id, c.owner, now, audit);
    c.last_used_at = c.created_at;
}

/// A query finished; the container returns to its home pool.
inline void finish_query(Fleet& fleet, ContainerId id) { transition(fleet.at(id), ContainerEvent::Complete); }

/// The least-recently-used idle executant when one container can go, at
/// most once per evaluation epoch.
inline std::optional<ContainerId> identify_idle(Fleet& fleet, ActionId action, const QueueModel& model,
                                                const QosSpec& qos, std::int64_t epoch,
                                                DiscriminantForm form = DiscriminantForm::Consistent) {
    auto& pools = fleet.pools(action);
    if (pools.last_lend_epoch == epoch || pools.executant.empty()) return std::nullopt;
    if (idle_discriminant(model, qos, form) != IdleDecision::CanLend) return std::nullopt;
    auto id = detail::pick_idle(fleet, pools.executant, ContainerState::Executant, false);
    if (id) pools.last_lend_epoch = epoch;
    return id;
}

namespace detail {

inline void pack(Container& c, const Broker& broker, const std::shared_ptr<const PlanRecord>& plan) {
    c.packed_libraries = plan->libraries;
    c.plan = plan;
    c.sealed_entries.clear();
    c.sealed_entries.reserve(plan->renters.size() + 1);
    c.sealed_entries.push_back(broker.code_of(c.origin));
    for (ActionId r : plan->renters) c.sealed_entries.push_back(broker.code_of(r));
}

}  // namespace detail

/// Re-creates an idle executant from the plan's image and offers it for rent.
inline void promote_to_lender(Fleet& fleet, Broker& broker, ContainerId id,
                              const std::shared_ptr<const PlanRecord>& plan, double now,
                              AuditLog* audit = nullptr) {
    require(plan != nullptr, Errc::PlanMismatch, "no plan");
    auto& c = fleet.at(id);
    if (c.owner != plan->lender)
        fail(Errc::PlanMismatch, "container " + std::to_string(id) + " is not owned by the plan's lender");
    if (c.state != ContainerState::Executant)
        fail(Errc::PlanMismatch, "container " + std::to_string(id) + " is " + to_string(c.state) + ", not an idle executant");
    transition(c, ContainerEvent::Promote);
    fleet.move(id, c.owner, Pool::Executant, c.owner, Pool::Lender);
    c.resident_code = c.resident_data = kNoAction;
    detail::pack(c, broker, plan);
    c.promoted_at = c.last_used_at = now;
    broker.register_lender(id);
    if (audit) audit->record(now, AuditKind::Promote, c.owner, id, "renters=" + std::to_string(plan->renters.size()));
}

/// Points every idle lender of the plan's action at the newer plan.
inline void refresh_lenders(Fleet& fleet, const Broker& broker, const std::shared_ptr<const PlanRecord>& plan) {
    for (ContainerId id : fleet.pools(plan->lender).lender) detail::pack(fleet.at(id), broker, plan);
}

/// Recycles every idle container past its pool timeout: all renters first,
/// then executants, then lenders.
inline std::vector<ContainerId> recycle_sweep(Fleet& fleet, double now, AuditLog* audit = nullptr) {
    std::vector<ContainerId> out;
    for (Pool p : {Pool::Renter, Pool::Executant, Pool::Lender})
        for (ActionId a = 0; a < fleet.action_count(); ++a)
            detail::expire_pool(fleet, fleet.pools(a)[p], now, audit, &out);
    return out;
}

}  // namespace pagurus
