#pragma once

// Per-query accounting, latency histograms and the derived comparisons
// between runs (elimination rate, memory saving).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pagurus/error.hpp"

namespace pagurus {

enum class StartPath { Warm, Rent, Restore, Cold };
inline constexpr std::size_t kStartPaths = 4;

constexpr const char* to_string(StartPath p) noexcept {
    switch (p) {
    case StartPath::Warm: return "warm";
    case StartPath::Rent: return "rent";
    case StartPath::Restore: return "restore";
    case StartPath::Cold: return "cold";
    }
    return "?";
}

inline std::optional<StartPath> start_path_from(std::string_view s) {
    for (std::size_t i = 0; i < kStartPaths; ++i)
        if (s == to_string(static_cast<StartPath>(i))) return static_cast<StartPath>(i);
    return std::nullopt;
}

/// Nearest-rank percentile of raw samples.
inline double percentile_raw(std::vector<double> samples, double q) {
    require(!samples.empty(), Errc::EmptyHistogram, "no samples");
    require(q > 0.0 && q < 1.0, Errc::InvalidParam, "percentile must lie in (0,1)");
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size()) - 1e-9));
    const auto k = std::clamp<std::size_t>(rank, 1, samples.size()) - 1;
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k), samples.end());
    return samples[k];
}

/// 100 log-spaced buckets between 100us and 100s, plus an underflow and an
/// overflow bucket. Raw samples are kept as well while the count is small.
class LatencyHistogram {
public:
    static constexpr std::size_t kBuckets = 100;
    static constexpr double kLow = 1e-4;
    static constexpr double kHigh = 1e2;
    static constexpr std::size_t kRawLimit = 1'000'000;

    explicit LatencyHistogram(bool keep_raw = true) : keep_raw_(keep_raw) {}

    static double edge(std::size_t i) noexcept {
        return kLow * std::pow(kHigh / kLow, static_cast<double>(i) / kBuckets);
    }

    void add(double x) {
        ++count_;
        min_ = count_ == 1 ? x : std::min(min_, x);
        max_ = count_ == 1 ? x : std::max(max_, x);
        std::size_t slot;
        if (x < kLow) {
            slot = 0;
        } else if (x >= kHigh) {
            slot = kBuckets + 1;
        } else {
            const double pos = std::log(x / kLow) / std::log(kHigh / kLow) * kBuckets;
            slot = 1 + std::min<std::size_t>(static_cast<std::size_t>(pos), kBuckets - 1);
            // guard against rounding right at an edge
            if (x < edge(slot - 1)) --slot;
            else if (slot < kBuckets && x >= edge(slot)) ++slot;
        }
        ++counts_[slot];
        if (keep_raw_) {
            if (raw_.size() < kRawLimit) raw_.push_back(x);
            else keep_raw_ = false, raw_.clear(), raw_.shrink_to_fit();
        }
    }

    std::uint64_t count() const noexcept { return count_; }
    bool has_raw() const noexcept { return keep_raw_ && raw_.size() == count_; }

    /// Bucketed estimate with linear interpolation inside the bucket.
    double percentile_bucketed(double q) const {
        require(count_ > 0, Errc::EmptyHistogram, "histogram is empty");
        require(q > 0.0 && q < 1.0, Errc::InvalidParam, "percentile must lie in (0,1)");
        const double target = q * static_cast<double>(count_);
        double seen = 0.0;
        for (std::size_t s = 0; s < counts_.size(); ++s) {
            if (counts_[s] == 0) continue;
            if (seen + static_cast<double>(counts_[s]) >= target) {
                double lo = s == 0 ? min_ : edge(s - 1);
                double hi = s == kBuckets + 1 ? max_ : edge(s);
                lo = std::max(lo, min_);
                hi = std::min(hi, max_);
                const double frac = (target - seen) / static_cast<double>(counts_[s]);
                return lo + (hi - lo) * frac;
            }
            seen += static_cast<double>(counts_[s]);
        }
        return max_;
    }

    /// Exact on raw samples when available, bucketed otherwise.
    double percentile(double q) const {
        require(count_ > 0, Errc::EmptyHistogram, "histogram is empty");
        return has_raw() ? percentile_raw(raw_, q) : percentile_bucketed(q);
    }

    const std::array<std::uint64_t, kBuckets + 2>& buckets() const noexcept { return counts_; }

private:
    bool keep_raw_;
    std::uint64_t count_ = 0;
    double min_ = 0.0, max_ = 0.0;
    std::array<std::uint64_t, kBuckets + 2> counts_{};
    std::vector<double> raw_;
};

inline double percentile(const LatencyHistogram& h, double q) { return h.percentile(q); }

struct QueryRecord {
    std::uint32_t action = 0;
    std::uint32_t index = 0;  // per-action arrival index
    double arrival = 0.0;
    double wait = 0.0;
    double startup = 0.0;
    double exec = 0.0;
    double latency = 0.0;
    StartPath path = StartPath::Cold;
    bool operator==(const QueryRecord&) const = default;
};

struct ActionStats {
    std::string action;
    double latency_target = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t completed = 0;
    std::array<std::uint64_t, kStartPaths> paths{};
    double p50 = 0.0, p95 = 0.0, p99 = 0.0;
    double mean_latency = 0.0, mean_startup = 0.0, mean_exec = 0.0, mean_wait = 0.0;
    double r_real = 0.0;         // fraction of all completions meeting the target
    double r_real_window = 0.0;  // same over the last W completions
    std::uint64_t launches = 0;  // containers started for this action
    std::uint64_t peak_containers = 0;

    std::uint64_t count(StartPath p) const noexcept { return paths[static_cast<std::size_t>(p)]; }
    bool operator==(const ActionStats&) const = default;
};

struct MetricsReport {
    std::string policy;
    std::uint64_t seed = 0;
    std::uint64_t workload_fingerprint = 0;
    double duration = 0.0;
    std::vector<ActionStats> actions;
    double container_memory_mb = 256.0;
    double memory_time_mb_s = 0.0;
    double peak_memory_mb = 0.0;
    std::uint64_t peak_containers = 0;
    double standing_memory_mb = 0.0;  // always-on containers outside any action's pools
    std::map<std::string, std::uint64_t> launches;
    std::map<std::string, std::uint64_t> audit;
    std::uint64_t audit_violations = 0;
    std::uint64_t arrivals = 0, completions = 0, in_flight = 0, rejected = 0;
    std::uint64_t events = 0;
    std::uint64_t trace_hash = 0;
    std::vector<QueryRecord> queries;

    const ActionStats& action(std::string_view name) const {
        for (const auto& a : actions)
            if (a.action == name) return a;
        fail(Errc::UnknownAction, "report has no action '" + std::string(name) + "'");
    }
    bool operator==(const MetricsReport&) const = default;
};

namespace detail {

inline std::optional<std::uint32_t> action_index(const MetricsReport& r, std::string_view name) {
    for (std::uint32_t i = 0; i < r.actions.size(); ++i)
        if (r.actions[i].action == name) return i;
    return std::nullopt;
}

inline void require_paired(const MetricsReport& a, const MetricsReport& b) {
    require(a.workload_fingerprint == b.workload_fingerprint && a.seed == b.seed, Errc::MismatchedRuns,
            "reports come from different workloads or seeds");
}

}  // namespace detail

/// Among queries of `action` that took the cold path in the baseline run,
/// the fraction served warm or by a rented container here.
inline double elimination_rate(const MetricsReport& run, const MetricsReport& baseline, std::string_view action) {
    require(!baseline.queries.empty(), Errc::MissingBaseline, "baseline has no per-query records");
    require(!run.queries.empty(), Errc::MissingBaseline, "run has no per-query records");
    detail::require_paired(run, baseline);
    const auto a = detail::action_index(run, action);
    const auto b = detail::action_index(baseline, action);
    require(a && b, Errc::UnknownAction, "no action '" + std::string(action) + "' in both reports");

    std::map<std::uint32_t, StartPath> served;
    for (const auto& q : run.queries)
        if (q.action == *a) served[q.index] = q.path;
    std::uint64_t denom = 0, avoided = 0;
    for (const auto& q : baseline.queries) {
        if (q.action != *b || q.path != StartPath::Cold) continue;
        auto it = served.find(q.index);
        if (it == served.end()) continue;  // not completed in this run
        ++denom;
        avoided += it->second == StartPath::Warm || it->second == StartPath::Rent;
    }
    require(denom > 0, Errc::MissingBaseline, "baseline has no cold queries for '" + std::string(action) + "'");
    return static_cast<double>(avoided) / static_cast<double>(denom);
}

/// (baseline peak containers - run peak containers) x container memory.
inline double memory_saving(const MetricsReport& run, const MetricsReport& baseline) {
    detail::require_paired(run, baseline);
    return (static_cast<double>(baseline.peak_containers) - static_cast<double>(run.peak_containers)) *
           run.container_memory_mb;
}

/// Per-action variant using each action's own peak.
inline double memory_saving(const MetricsReport& run, const MetricsReport& baseline, std::string_view action) {
    detail::require_paired(run, baseline);
    return (static_cast<double>(baseline.action(action).peak_containers) -
            static_cast<double>(run.action(action).peak_containers)) *
           run.container_memory_mb;
}

/// Event-loop side accumulator that produces a MetricsReport.
class Recorder {
public:
    Recorder(std::vector<std::string> names, std::vector<double> latency_targets, std::size_t window = 200,
             bool keep_queries = true)
        : window_(window), keep_queries_(keep_queries) {
        require(names.size() == latency_targets.size(), Errc::InvalidParam, "one target per action");
        require(window >= 1, Errc::InvalidParam, "window must hold at least one query");
        per_.resize(names.size());
        for (std::size_t i = 0; i < names.size(); ++i) {
            per_[i].stats.action = std::move(names[i]);
            per_[i].stats.latency_target = latency_targets[i];
        }
    }

    void arrival(std::uint32_t action) { ++per_.at(action).stats.arrivals; }

    void complete(const QueryRecord& q) {
        auto& p = per_.at(q.action);
        auto& s = p.stats;
        ++s.completed;
        ++s.paths[static_cast<std::size_t>(q.path)];
        p.hist.add(q.latency);
        p.sum_latency += q.latency;
        p.sum_startup += q.startup;
        p.sum_exec += q.exec;
        p.sum_wait += q.wait;
        const bool met = q.latency <= s.latency_target;
        p.met += met;
        p.recent.push_back(met);
        p.recent_met += met;
        if (p.recent.size() > window_) {
            p.recent_met -= p.recent.front();
            p.recent.pop_front();
        }
        if (keep_queries_) queries_.push_back(q);
    }

    /// Fraction of the last W completions of `action` that met its target.
    std::optional<double> r_real(std::uint32_t action) const {
        const auto& p = per_.at(action);
        if (p.recent.empty()) return std::nullopt;
        return static_cast<double>(p.recent_met) / static_cast<double>(p.recent.size());
    }

    void launched(std::uint32_t action, const std::string& kind) {
        ++launches_[kind];
        if (action < per_.size()) ++per_[action].stats.launches;
    }

    /// Called whenever the live container count may have changed.
    void containers(double now, std::size_t live) {
        memory_time_ += static_cast<double>(live_) * (now - last_change_);
        last_change_ = now;
        live_ = live;
        peak_ = std::max<std::uint64_t>(peak_, live);
    }

    void action_containers(std::uint32_t action, std::size_t serving) {
        auto& s = per_.at(action).stats;
        s.peak_containers = std::max<std::uint64_t>(s.peak_containers, serving);
    }

    const std::vector<QueryRecord>& queries() const noexcept { return queries_; }

    MetricsReport finalize(double end_time, double container_memory_mb) {
        containers(end_time, live_);
        MetricsReport r;
        r.duration = end_time;
        r.container_memory_mb = container_memory_mb;
        r.memory_time_mb_s = memory_time_ * container_memory_mb;
        r.peak_containers = peak_;
        r.peak_memory_mb = static_cast<double>(peak_) * container_memory_mb;
        r.launches = launches_;
        for (auto& p : per_) {
            auto s = p.stats;
            if (s.completed > 0) {
                const double n = static_cast<double>(s.completed);
                s.p50 = p.hist.percentile(0.50);
                s.p95 = p.hist.percentile(0.95);
                s.p99 = p.hist.percentile(0.99);
                s.mean_latency = p.sum_latency / n;
                s.mean_startup = p.sum_startup / n;
                s.mean_exec = p.sum_exec / n;
                s.mean_wait = p.sum_wait / n;
                s.r_real = static_cast<double>(p.met) / n;
                s.r_real_window = static_cast<double>(p.recent_met) / static_cast<double>(p.recent.size());
            }
            r.arrivals += s.arrivals;
            r.completions += s.completed;
            r.actions.push_back(std::move(s));
        }
        if (keep_queries_) r.queries = queries_;
        return r;
    }

private:
    struct PerAction {
        ActionStats stats;
        LatencyHistogram hist;
        double sum_latency = 0.0, sum_startup = 0.0, sum_exec = 0.0, sum_wait = 0.0;
        std::uint64_t met = 0;
        std::deque<bool> recent;
        std::size_t recent_met = 0;
    };

    std::size_t window_;
    bool keep_queries_;
    std::vector<PerAction> per_;
    std::vector<QueryRecord> queries_;
    std::map<std::string, std::uint64_t> launches_;
    double memory_time_ = 0.0;
    double last_change_ = 0.0;
    std::size_t live_ = 0;
    std::uint64_t peak_ = 0;
};

}  // namespace pagurus
