#pragma once

// System-wide broker: collects idle notifications, runs re-packing epochs
// with an image cache, keeps the lender registry and performs rent handoffs.

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pagurus/audit.hpp"
#include "pagurus/container.hpp"
#include "pagurus/error.hpp"
#include "pagurus/manifest.hpp"
#include "pagurus/repack.hpp"
#include "pagurus/sealed.hpp"

namespace pagurus {

struct RentRequest {
    ActionId requester = kNoAction;
    double submitted_at = 0.0;
    const LibrarySet* required_libraries = nullptr;  // the requester's manifest
};

struct RentMatch {
    ActionId lender = kNoAction;
    ContainerId container = 0;
    bool operator==(const RentMatch&) const = default;
};

struct BrokerOptions {
    std::optional<Caps> caps;  // defaults to default_caps(manifests, renter_pool_size)
    int renter_pool_size = 2;
    bool shared_action_nl_draw = true;  // select_renters_batch instead of independent draws
    bool origin_reclaim = true;         // a lender may be rented back by the action that lent it
    BuildCosts build_costs{};
    double handoff_latency = 0.010;  // max(clean, decrypt)
};

class Broker {
public:
    Broker(std::vector<LibraryManifest> manifests, BrokerOptions options = {})
        : manifests_(std::move(manifests)), options_(std::move(options)) {
        std::set<std::string> seen;
        for (const auto& m : manifests_)
            require(seen.insert(m.action).second, Errc::DuplicateAction, m.action);
        caps_ = options_.caps ? *options_.caps : default_caps(manifests_, options_.renter_pool_size);
        require(caps_.action_l >= 0 && caps_.action_nl >= 0, Errc::InvalidParam, "caps must be non-negative");
        current_.resize(manifests_.size());
        cache_.resize(manifests_.size());
        codes_.reserve(manifests_.size());
        for (const auto& m : manifests_)
            codes_.push_back(seal(to_bytes("def main(args):  # " + m.action + "\n"), m.action,
                                  controller_authority()));
    }

    const std::vector<LibraryManifest>& manifests() const noexcept { return manifests_; }
    const BrokerOptions& options() const noexcept { return options_; }
    Caps caps() const noexcept { return caps_; }

    ActionId id_of(std::string_view action) const {
        for (ActionId a = 0; a < manifests_.size(); ++a)
            if (manifests_[a].action == action) return a;
        fail(Errc::UnknownAction, "no action named '" + std::string(action) + "'");
    }

    const LibraryManifest& manifest(ActionId a) const {
        if (!(a < manifests_.size())) fail(Errc::UnknownAction, "unknown action id " + std::to_string(a));
        return manifests_[a];
    }

    /// The controller's sealed copy of an action's code.
    const SealedCode& code_of(ActionId a) const {
        if (!(a < codes_.size())) fail(Errc::UnknownAction, "unknown action id " + std::to_string(a));
        return codes_[a];
    }

    void notify_idle(ActionId a) {
        manifest(a);
        pending_.insert(a);
    }
    const std::set<ActionId>& pending_notifications() const noexcept { return pending_; }

    /// Plans for every notified action plus `also` (typically actions that
    /// still hold lenders). build_time_estimate is zero when the union image
    /// is unchanged since that lender's previous epoch.
    std::vector<RepackPlan> repack_epoch(std::uint64_t seed, std::span<const ActionId> also = {}) {
        std::set<ActionId> lenders = std::move(pending_);
        pending_.clear();
        lenders.insert(also.begin(), also.end());
        std::vector<RepackPlan> plans;
        if (lenders.empty()) return plans;

        if (options_.shared_action_nl_draw) {
            std::vector<const LibraryManifest*> who;
            for (ActionId a : lenders) who.push_back(&manifests_[a]);
            plans = select_renters_batch(who, manifests_, caps_, seed);
        } else {
            for (ActionId a : lenders) plans.push_back(select_renters(manifests_[a], manifests_, caps_, seed));
        }
        for (auto& p : plans) {
            auto& cached = cache_[id_of(p.lender)];
            if (cached && *cached == p.union_libraries) {
                p.build_time_estimate = 0.0;
                ++cache_hits_;
            } else {
                p.build_time_estimate = estimate_build(p, options_.build_costs);
                cached = p.union_libraries;
                ++rebuilds_;
            }
        }
        return plans;
    }

    /// Makes a plan the live one for its lender (the repack-complete step).
    std::shared_ptr<const PlanRecord> commit(const RepackPlan& plan) {
        auto rec = std::make_shared<PlanRecord>();
        rec->lender = id_of(plan.lender);
        for (const auto& r : plan.renters) rec->renters.push_back(id_of(r));
        std::sort(rec->renters.begin(), rec->renters.end());
        rec->libraries = std::make_shared<const LibrarySet>(plan.union_libraries);
        rec->version = ++plan_versions_;
        current_[rec->lender] = rec;
        return rec;
    }

    std::shared_ptr<const PlanRecord> current_plan(ActionId a) const {
        manifest(a);
        return current_[a];
    }

    void register_lender(ContainerId id) { registry_.push_back(id); }

    /// A live lender that packs every library the requester needs and either
    /// lists it or (with origin reclaim) was lent by it; the oldest promotion
    /// wins.
    std::optional<RentMatch> match_rent(const RentRequest& req, Fleet& fleet) {
        require(req.required_libraries != nullptr, Errc::InvalidParam, "rent request without libraries");
        manifest(req.requester);
        std::optional<RentMatch> best;
        double best_time = 0.0;
        std::size_t kept = 0;
        for (std::size_t i = 0; i < registry_.size(); ++i) {
            const ContainerId id = registry_[i];
            const auto& c = fleet.at(id);
            if (c.state != ContainerState::Lender) continue;  // rented or recycled: prune
            registry_[kept++] = id;
            const bool listed = c.plan && c.plan->lists(req.requester);
            const bool own = options_.origin_reclaim && c.origin == req.requester;
            if (!listed && !own) continue;
            if (!c.packed_libraries || !is_subset(*req.required_libraries, *c.packed_libraries)) continue;
            if (!best || c.promoted_at < best_time) {
                best = RentMatch{c.owner, id};
                best_time = c.promoted_at;
            }
        }
        registry_.resize(kept);
        return best;
    }

    /// Moves a matched lender into the requester's renter pool. Returns the
    /// handoff latency. Cleaning and unsealing run in parallel, so the cost is
    /// a single constant.
    double handoff(Fleet& fleet, ActionId lender, ContainerId id, ActionId requester, double now,
                   AuditLog* audit = nullptr) {
        auto& c = fleet.at(id);
        const auto& pool = fleet.pools(lender).lender;
        if (c.state != ContainerState::Lender || c.owner != lender ||
            std::find(pool.begin(), pool.end(), id) == pool.end())
            fail(Errc::StaleContainer, "container " + std::to_string(id) + " is no longer lendable");
        // drop lender-side data and every other action's sealed code
        c.resident_code = c.resident_data = kNoAction;
        std::optional<SealedCode> mine;
        for (auto& e : c.sealed_entries)
            if (e.owner() == manifests_[requester].action) mine = std::move(e);
        c.sealed_entries.clear();
        require(mine.has_value(), Errc::WrongAuthority,
                "no sealed entry for '" + manifests_[requester].action + "' in container " + std::to_string(id));
        unseal(*mine, controller_authority());
        c.resident_code = requester;

        transition(c, ContainerEvent::RentGranted);
        fleet.move(id, lender, Pool::Lender, requester, Pool::Renter);
        c.plan.reset();
        c.last_used_at = now;
        if (audit) {
            audit->record(now, AuditKind::Handoff, requester, id, "from=" + audit->name(lender));
            audit->check_access(c, requester, now);
        }
        return options_.handoff_latency;
    }

    std::size_t cache_hits() const noexcept { return cache_hits_; }
    std::size_t rebuilds() const noexcept { return rebuilds_; }

private:
    std::vector<LibraryManifest> manifests_;
    BrokerOptions options_;
    Caps caps_;
    std::vector<SealedCode> codes_;
    std::set<ActionId> pending_;
    std::vector<std::shared_ptr<const PlanRecord>> current_;
    std::vector<std::optional<LibrarySet>> cache_;
    std::deque<ContainerId> registry_;
    std::uint64_t plan_versions_ = 0;
    std::size_t cache_hits_ = 0;
    std::size_t rebuilds_ = 0;
};

}  // namespace pagurus
