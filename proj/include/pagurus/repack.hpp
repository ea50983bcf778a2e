#pragma once

// Choosing renters for a lender and building the union image plan.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "pagurus/error.hpp"
#include "pagurus/manifest.hpp"
#include "pagurus/random.hpp"

namespace pagurus {

enum class ExclusionReason { VersionConflict, NotRepackable, UnionConflict };

constexpr const char* to_string(ExclusionReason r) noexcept {
    switch (r) {
    case ExclusionReason::VersionConflict: return "VersionConflict";
    case ExclusionReason::NotRepackable: return "NotRepackable";
    case ExclusionReason::UnionConflict: return "UnionConflict";
    }
    return "?";
}

struct Exclusion {
    std::string action;
    ExclusionReason reason;
    bool operator==(const Exclusion&) const = default;
};

struct Caps {
    int action_l = 0;
    int action_nl = 0;
    bool operator==(const Caps&) const = default;
};

struct RepackPlan {
    std::string lender;
    std::vector<std::string> renters;
    LibrarySet union_libraries;
    LibrarySet base_libraries;  // the lender's own image
    double build_time_estimate = 0.0;
    std::vector<Exclusion> excluded;

    bool lists(std::string_view action) const {
        return std::find(renters.begin(), renters.end(), action) != renters.end();
    }
    bool operator==(const RepackPlan&) const = default;
};

struct BuildCosts {
    std::map<std::string, double> per_library;  // seconds
    double default_cost = 2.0;

    double cost(const std::string& lib) const {
        auto it = per_library.find(lib);
        return it == per_library.end() ? default_cost : it->second;
    }
};

/// Actions sharing at least one library with the lender and free of version
/// clashes with it. Rejected ones are appended to `excluded` when given.
inline std::vector<const LibraryManifest*> candidate_filter(const LibraryManifest& lender,
                                                            std::span<const LibraryManifest> all,
                                                            std::vector<Exclusion>* excluded = nullptr) {
    std::vector<const LibraryManifest*> out;
    if (lender.libraries.empty()) return out;
    for (const auto& m : all) {
        if (m.action == lender.action || !shares_library(lender.libraries, m.libraries)) continue;
        if (!m.repackable) {
            if (excluded) excluded->push_back({m.action, ExclusionReason::NotRepackable});
        } else if (versions_conflict(lender.libraries, m.libraries)) {
            if (excluded) excluded->push_back({m.action, ExclusionReason::VersionConflict});
        } else {
            out.push_back(&m);
        }
    }
    return out;
}

/// Cosine of the binary presence vectors of a and b over `universe`.
inline double similarity(const LibraryManifest& a, const LibraryManifest& b,
                         std::span<const std::string> universe) {
    if (a.libraries.empty() && b.libraries.empty())
        fail(Errc::EmptyVector, "both '" + a.action + "' and '" + b.action + "' have no libraries");
    std::size_t na = 0, nb = 0, dot = 0;
    for (const auto& lib : universe) {
        const bool in_a = a.libraries.count(lib) > 0;
        const bool in_b = b.libraries.count(lib) > 0;
        na += in_a;
        nb += in_b;
        dot += in_a && in_b;
    }
    require(na == a.libraries.size() && nb == b.libraries.size(), Errc::InvalidParam,
            "library universe does not cover both manifests");
    if (na == 0 || nb == 0) return 0.0;
    return static_cast<double>(dot) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
}

/// Same value without materialising a universe.
inline double similarity(const LibraryManifest& a, const LibraryManifest& b) {
    if (a.libraries.empty() && b.libraries.empty())
        fail(Errc::EmptyVector, "both '" + a.action + "' and '" + b.action + "' have no libraries");
    if (a.libraries.empty() || b.libraries.empty()) return 0.0;
    std::size_t dot = 0;
    for (const auto& entry : a.libraries) dot += b.libraries.count(entry.first);
    return static_cast<double>(dot) /
           std::sqrt(static_cast<double>(a.libraries.size()) * static_cast<double>(b.libraries.size()));
}

/// Per-lender caps: ceil(#action-L / pool) and ceil(#action-NL / pool).
inline Caps default_caps(std::span<const LibraryManifest> all, int renter_pool_size) {
    require(renter_pool_size >= 1, Errc::InvalidParam, "renter pool size must be at least 1");
    int l = 0, nl = 0;
    for (const auto& m : all) (m.has_extra_libraries ? l : nl)++;
    const auto ceil_div = [renter_pool_size](int x) { return (x + renter_pool_size - 1) / renter_pool_size; };
    return {ceil_div(l), ceil_div(nl)};
}

inline double estimate_build(const RepackPlan& plan, const BuildCosts& costs = {}) {
    double total = 0.0;
    for (const auto& [name, version] : plan.union_libraries) {
        auto it = plan.base_libraries.find(name);
        if (it == plan.base_libraries.end() || it->second != version) total += costs.cost(name);
    }
    return total;
}

/// Returns a list of broken invariants; empty means the plan is sound.
inline std::vector<std::string> validate_plan(const RepackPlan& plan, std::span<const LibraryManifest> all) {
    std::vector<std::string> problems;
    const auto* lender = find_manifest(all, plan.lender);
    if (!lender) {
        problems.push_back("unknown lender " + plan.lender);
        return problems;
    }
    if (!is_subset(lender->libraries, plan.union_libraries))
        problems.push_back("union misses lender libraries");
    std::unordered_set<std::string> seen;
    for (const auto& r : plan.renters) {
        if (r == plan.lender) problems.push_back("lender listed as its own renter");
        if (!seen.insert(r).second) problems.push_back("renter " + r + " listed twice");
        const auto* m = find_manifest(all, r);
        if (!m) {
            problems.push_back("unknown renter " + r);
            continue;
        }
        if (!m->repackable) problems.push_back("renter " + r + " is not repackable");
        if (!is_subset(m->libraries, plan.union_libraries))
            problems.push_back("renter " + r + " not covered by the union");
    }
    return problems;
}

namespace detail {

inline void begin_plan(RepackPlan& plan, const LibraryManifest& lender) {
    plan.lender = lender.action;
    plan.union_libraries = lender.libraries;
    plan.base_libraries = lender.libraries;
}

inline bool try_add(RepackPlan& plan, const LibraryManifest& m) {
    if (versions_conflict(plan.union_libraries, m.libraries)) {
        plan.excluded.push_back({m.action, ExclusionReason::UnionConflict});
        return false;
    }
    plan.renters.push_back(m.action);
    for (const auto& entry : m.libraries) plan.union_libraries.insert(entry);
    return true;
}

inline void pick_action_l(RepackPlan& plan, const LibraryManifest& lender,
                          std::span<const LibraryManifest> all, int cap, Rng& rng) {
    if (cap <= 0 || !lender.repackable) return;
    auto candidates = candidate_filter(lender, all, &plan.excluded);
    int taken = 0;
    if (!candidates.empty()) {
        // names are unique, so (score, name) is a total order
        std::vector<std::pair<double, const LibraryManifest*>> ranked;
        ranked.reserve(candidates.size());
        for (const auto* c : candidates) ranked.emplace_back(similarity(lender, *c), c);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second->action < b.second->action;
        });
        for (const auto& [score, c] : ranked) {
            if (taken >= cap) break;
            taken += try_add(plan, *c);
        }
        return;
    }
    std::vector<const LibraryManifest*> pool;
    for (const auto& m : all) {
        if (m.action == lender.action || !m.has_extra_libraries) continue;
        if (!m.repackable) {
            plan.excluded.push_back({m.action, ExclusionReason::NotRepackable});
        } else if (versions_conflict(lender.libraries, m.libraries)) {
            plan.excluded.push_back({m.action, ExclusionReason::VersionConflict});
        } else {
            pool.push_back(&m);
        }
    }
    rng.shuffle(std::span(pool));
    for (const auto* c : pool) {
        if (taken >= cap) break;
        taken += try_add(plan, *c);
    }
}

inline std::vector<const LibraryManifest*> action_nl_pool(std::span<const LibraryManifest> all) {
    std::vector<const LibraryManifest*> pool;
    for (const auto& m : all)
        if (!m.has_extra_libraries && m.repackable) pool.push_back(&m);
    return pool;
}

}  // namespace detail

/// Top-similarity action-L candidates plus randomly drawn action-NLs.
inline RepackPlan select_renters(const LibraryManifest& lender, std::span<const LibraryManifest> all,
                                 Caps caps, std::uint64_t seed) {
    require(caps.action_l >= 0 && caps.action_nl >= 0, Errc::InvalidParam, "caps must be non-negative");
    RepackPlan plan;
    detail::begin_plan(plan, lender);
    Rng rng(derive_seed(seed, "renters", lender.action));
    detail::pick_action_l(plan, lender, all, caps.action_l, rng);
    if (lender.repackable && caps.action_nl > 0) {
        auto pool = detail::action_nl_pool(all);
        std::erase_if(pool, [&](const LibraryManifest* m) { return m->action == lender.action; });
        rng.shuffle(std::span(pool));
        for (int i = 0; i < caps.action_nl && i < static_cast<int>(pool.size()); ++i)
            detail::try_add(plan, *pool[static_cast<std::size_t>(i)]);
    }
    return plan;
}

/// Plans for every lender of one epoch. Action-L choice is as in
/// select_renters. Action-NL renters come from a single shuffled list that
/// the lenders (in name order) consume in turn, so together they reach as
/// many distinct action-NLs as their caps allow.
inline std::vector<RepackPlan> select_renters_batch(std::span<const LibraryManifest* const> lenders,
                                                    std::span<const LibraryManifest> all, Caps caps,
                                                    std::uint64_t seed) {
    require(caps.action_l >= 0 && caps.action_nl >= 0, Errc::InvalidParam, "caps must be non-negative");
    std::vector<const LibraryManifest*> order(lenders.begin(), lenders.end());
    std::sort(order.begin(), order.end(),
              [](const auto* a, const auto* b) { return a->action < b->action; });

    auto pool = detail::action_nl_pool(all);
    Rng shared(derive_seed(seed, "renters-nl"));
    shared.shuffle(std::span(pool));
    std::size_t cursor = 0;

    std::vector<RepackPlan> plans;
    plans.reserve(order.size());
    for (const auto* lender : order) {
        RepackPlan plan;
        detail::begin_plan(plan, *lender);
        Rng rng(derive_seed(seed, "renters", lender->action));
        detail::pick_action_l(plan, *lender, all, caps.action_l, rng);
        if (lender->repackable) {
            int taken = 0;
            for (std::size_t step = 0; step < pool.size() && taken < caps.action_nl; ++step) {
                const auto* m = pool[cursor];
                cursor = (cursor + 1) % pool.size();
                if (m->action == lender->action || plan.lists(m->action)) continue;
                taken += detail::try_add(plan, *m);
            }
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

}  // namespace pagurus
