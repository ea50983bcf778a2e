#pragma once

// Simulated containers, their state machine and the per-action pools.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pagurus/error.hpp"
#include "pagurus/manifest.hpp"
#include "pagurus/sealed.hpp"

namespace pagurus {

using ActionId = std::uint32_t;
using ContainerId = std::uint64_t;
inline constexpr ActionId kNoAction = std::numeric_limits<ActionId>::max();

enum class ContainerState { ColdStarting, Executant, Lender, Renter, Busy, Recycled };
enum class ContainerEvent { BootDone, Invoke, Complete, Promote, RentGranted, Timeout };

constexpr const char* to_string(ContainerState s) noexcept {
    switch (s) {
    case ContainerState::ColdStarting: return "ColdStarting";
    case ContainerState::Executant: return "Executant";
    case ContainerState::Lender: return "Lender";
    case ContainerState::Renter: return "Renter";
    case ContainerState::Busy: return "Busy";
    case ContainerState::Recycled: return "Recycled";
    }
    return "?";
}

constexpr const char* to_string(ContainerEvent e) noexcept {
    switch (e) {
    case ContainerEvent::BootDone: return "boot-done";
    case ContainerEvent::Invoke: return "invoke";
    case ContainerEvent::Complete: return "complete";
    case ContainerEvent::Promote: return "promote";
    case ContainerEvent::RentGranted: return "rent-granted";
    case ContainerEvent::Timeout: return "timeout";
    }
    return "?";
}

/// The lender-side view of a re-packing decision, in id space.
struct PlanRecord {
    ActionId lender = kNoAction;
    std::vector<ActionId> renters;  // sorted
    std::shared_ptr<const LibrarySet> libraries;
    std::uint64_t version = 0;

    bool lists(ActionId a) const { return std::binary_search(renters.begin(), renters.end(), a); }
};

struct Container {
    ContainerId id = 0;
    ActionId owner = kNoAction;   // whose scheduler manages it now
    ActionId origin = kNoAction;  // who cold-started it
    ContainerState state = ContainerState::ColdStarting;
    ContainerState home = ContainerState::Executant;  // pool to return to after Busy
    std::shared_ptr<const LibrarySet> packed_libraries;
    std::vector<SealedCode> sealed_entries;
    ActionId resident_code = kNoAction;  // action whose code is readable in the container
    ActionId resident_data = kNoAction;
    std::shared_ptr<const PlanRecord> plan;  // set while lending
    double created_at = 0.0;
    double last_used_at = 0.0;
    double promoted_at = 0.0;
    double memory_mb = 256.0;
    bool pinned = false;  // exempt from recycling

    bool live() const noexcept { return state != ContainerState::Recycled; }
    bool idle() const noexcept {
        return state == ContainerState::Executant || state == ContainerState::Lender ||
               state == ContainerState::Renter;
    }
};

/// Next state for (state, event); throws IllegalTransition for pairs outside
/// the edge set. `home` is the pool a Busy container returns to.
inline ContainerState next_state(ContainerState from, ContainerEvent ev,
                                 ContainerState home = ContainerState::Executant) {
    using S = ContainerState;
    using E = ContainerEvent;
    switch (from) {
    case S::ColdStarting:
        if (ev == E::BootDone) return S::Executant;
        break;
    case S::Executant:
        if (ev == E::Invoke) return S::Busy;
        if (ev == E::Promote) return S::Lender;
        if (ev == E::Timeout) return S::Recycled;
        break;
    case S::Lender:
        if (ev == E::RentGranted) return S::Renter;
        if (ev == E::Timeout) return S::Recycled;
        break;
    case S::Renter:
        if (ev == E::Invoke) return S::Busy;
        if (ev == E::Timeout) return S::Recycled;
        break;
    case S::Busy:
        if (ev == E::Complete && (home == S::Executant || home == S::Renter)) return home;
        break;
    case S::Recycled: break;
    }
    fail(Errc::IllegalTransition, std::string(to_string(from)) + " --" + to_string(ev) + "-->");
}

inline void transition(Container& c, ContainerEvent ev) {
    const auto next = next_state(c.state, ev, c.home);
    if (ev == ContainerEvent::Invoke) c.home = c.state;
    if (next == ContainerState::Renter) c.home = ContainerState::Renter;
    c.state = next;
}

struct Timeouts {
    double renter = 40.0;     // T1
    double executant = 60.0;  // T2
    double lender = 120.0;    // T3
};

inline void validate(const Timeouts& t) {
    require(t.renter > 0.0 && t.renter <= t.executant && t.executant <= t.lender, Errc::InvalidParam,
            "timeouts must satisfy 0 < T1 <= T2 <= T3");
}

enum class Pool { Executant, Lender, Renter };

struct PoolSet {
    std::vector<ContainerId> executant;
    std::vector<ContainerId> lender;
    std::vector<ContainerId> renter;
    std::int64_t last_lend_epoch = std::numeric_limits<std::int64_t>::min();
    int cold_in_flight = 0;

    std::vector<ContainerId>& operator[](Pool p) {
        return p == Pool::Executant ? executant : p == Pool::Lender ? lender : renter;
    }
    const std::vector<ContainerId>& operator[](Pool p) const {
        return p == Pool::Executant ? executant : p == Pool::Lender ? lender : renter;
    }
    // containers that serve this action's own queries
    std::size_t serving() const noexcept { return executant.size() + renter.size(); }
};

/// All containers on the node plus every action's pools.
class Fleet {
public:
    explicit Fleet(std::size_t actions = 0, Timeouts timeouts = {}, double memory_mb = 256.0)
        : pools_(actions), timeouts_(timeouts), memory_mb_(memory_mb) {
        validate(timeouts_);
    }

    std::size_t action_count() const noexcept { return pools_.size(); }
    const Timeouts& timeouts() const noexcept { return timeouts_; }
    double container_memory() const noexcept { return memory_mb_; }

    Container& at(ContainerId id) {
        if (!(id < containers_.size())) fail(Errc::InvalidParam, "unknown container " + std::to_string(id));
        return containers_[id];
    }
    const Container& at(ContainerId id) const {
        if (!(id < containers_.size())) fail(Errc::InvalidParam, "unknown container " + std::to_string(id));
        return containers_[id];
    }

    PoolSet& pools(ActionId a) {
        if (!(a < pools_.size())) fail(Errc::UnknownAction, "unknown action id " + std::to_string(a));
        return pools_[a];
    }
    const PoolSet& pools(ActionId a) const {
        if (!(a < pools_.size())) fail(Errc::UnknownAction, "unknown action id " + std::to_string(a));
        return pools_[a];
    }

    /// A fresh container booting for `owner`, listed in its executant pool.
    ContainerId create(ActionId owner, double now) {
        pools(owner);
        Container c;
        c.id = containers_.size();
        c.owner = c.origin = owner;
        c.created_at = c.last_used_at = now;
        c.memory_mb = memory_mb_;
        containers_.push_back(std::move(c));
        pools_[owner].executant.push_back(containers_.back().id);
        ++live_;
        peak_live_ = std::max(peak_live_, live_);
        return containers_.back().id;
    }

    /// A container that belongs to no action yet (a prewarmed stem cell).
    ContainerId create_unowned(double now) {
        Container c;
        c.id = containers_.size();
        c.state = ContainerState::Executant;
        c.created_at = c.last_used_at = now;
        c.memory_mb = memory_mb_;
        c.pinned = true;
        containers_.push_back(std::move(c));
        ++live_;
        peak_live_ = std::max(peak_live_, live_);
        return containers_.back().id;
    }

    /// Hands an unowned container to `owner` as an executant.
    void adopt(ContainerId id, ActionId owner) {
        auto& c = at(id);
        require(c.owner == kNoAction && c.live(), Errc::IllegalTransition, "container already owned");
        c.owner = c.origin = owner;
        c.pinned = false;
        pools(owner).executant.push_back(id);
    }

    void move(ContainerId id, ActionId from_action, Pool from, ActionId to_action, Pool to) {
        auto& src = pools(from_action)[from];
        auto it = std::find(src.begin(), src.end(), id);
        if (it == src.end()) fail(Errc::StaleContainer, "container " + std::to_string(id) + " not in pool");
        src.erase(it);
        pools(to_action)[to].push_back(id);
        at(id).owner = to_action;
    }

    /// Drops the container from its pool and marks it Recycled.
    void recycle(ContainerId id) {
        auto& c = at(id);
        transition(c, ContainerEvent::Timeout);
        if (c.owner != kNoAction) {
            for (Pool p : {Pool::Executant, Pool::Lender, Pool::Renter}) {
                auto& list = pools_[c.owner][p];
                list.erase(std::remove(list.begin(), list.end(), id), list.end());
            }
        }
        c.sealed_entries.clear();
        c.plan.reset();
        c.resident_code = c.resident_data = kNoAction;
        --live_;
    }

    double timeout_for(const Container& c) const noexcept {
        switch (c.state) {
        case ContainerState::Renter: return timeouts_.renter;
        case ContainerState::Lender: return timeouts_.lender;
        default: return timeouts_.executant;
        }
    }

    bool expired(const Container& c, double now) const noexcept {
        return c.idle() && !c.pinned && now - c.last_used_at >= timeout_for(c);
    }

    std::size_t live_count() const noexcept { return live_; }
    std::size_t peak_live() const noexcept { return peak_live_; }
    std::size_t launched() const noexcept { return containers_.size(); }
    const std::vector<Container>& all() const noexcept { return containers_; }

    /// Every live owned container sits in exactly one pool, the pool that
    /// matches its state. Returns a description of the first violation.
    std::optional<std::string> check_invariants() const {
        std::vector<int> seen(containers_.size(), 0);
        for (ActionId a = 0; a < pools_.size(); ++a) {
            for (Pool p : {Pool::Executant, Pool::Lender, Pool::Renter}) {
                for (ContainerId id : pools_[a][p]) {
                    if (id >= containers_.size()) return "dangling id " + std::to_string(id);
                    const auto& c = containers_[id];
                    if (++seen[id] > 1) return "container " + std::to_string(id) + " listed twice";
                    if (!c.live()) return "recycled container " + std::to_string(id) + " still pooled";
                    if (c.owner != a) return "container " + std::to_string(id) + " pooled under wrong owner";
                    const bool ok = p == Pool::Lender ? c.state == ContainerState::Lender
                                  : p == Pool::Renter
                                      ? c.state == ContainerState::Renter ||
                                            (c.state == ContainerState::Busy && c.home == ContainerState::Renter)
                                      : c.state == ContainerState::Executant ||
                                            c.state == ContainerState::ColdStarting ||
                                            (c.state == ContainerState::Busy && c.home == ContainerState::Executant);
                    if (!ok)
                        return "container " + std::to_string(id) + " in wrong pool for state " + to_string(c.state);
                }
            }
        }
        for (const auto& c : containers_)
            if (c.live() && c.owner != kNoAction && seen[c.id] != 1)
                return "live container " + std::to_string(c.id) + " missing from pools";
        return std::nullopt;
    }

private:
    std::vector<Container> containers_;
    std::vector<PoolSet> pools_;
    Timeouts timeouts_;
    double memory_mb_;
    std::size_t live_ = 0;
    std::size_t peak_live_ = 0;
};

}  // namespace pagurus
