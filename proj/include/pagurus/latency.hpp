#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pagurus/error.hpp"
#include "pagurus/random.hpp"

namespace pagurus {

enum class DistKind { Fixed, Exponential, LogNormal, Uniform };

constexpr const char* to_string(DistKind k) noexcept {
    switch (k) {
    case DistKind::Fixed: return "fixed";
    case DistKind::Exponential: return "exponential";
    case DistKind::LogNormal: return "lognormal";
    case DistKind::Uniform: return "uniform";
    }
    return "?";
}

/// Fixed(a); Exponential(mean a); LogNormal(mean a, log-sd b); Uniform[a, b].
struct Distribution {
    DistKind kind = DistKind::Fixed;
    double a = 0.0;
    double b = 0.0;

    static Distribution fixed(double v) { return {DistKind::Fixed, v, 0.0}; }
    static Distribution exponential(double mean) { return {DistKind::Exponential, mean, 0.0}; }
    static Distribution lognormal(double mean, double sigma) { return {DistKind::LogNormal, mean, sigma}; }
    static Distribution uniform(double lo, double hi) { return {DistKind::Uniform, lo, hi}; }

    double mean() const noexcept { return kind == DistKind::Uniform ? 0.5 * (a + b) : a; }

    double sample(Rng& rng) const {
        switch (kind) {
        case DistKind::Fixed: return a;
        case DistKind::Exponential: return rng.exponential(1.0 / a);
        case DistKind::LogNormal: return a * std::exp(b * rng.normal() - 0.5 * b * b);
        case DistKind::Uniform: return a + (b - a) * rng.uniform();
        }
        return a;
    }

    void validate(const std::string& what) const {
        const bool ok = std::isfinite(a) && std::isfinite(b) &&
                        (kind == DistKind::Uniform ? (a > 0.0 && b >= a) : a > 0.0) &&
                        (kind != DistKind::LogNormal || b >= 0.0);
        require(ok, Errc::ConfigError, what + ": invalid " + to_string(kind) + " parameters");
    }
    bool operator==(const Distribution&) const = default;
};

struct ActionTiming {
    Distribution cold_startup = Distribution::lognormal(1.5, 0.1);
    Distribution exec_time = Distribution::exponential(0.2);
    bool operator==(const ActionTiming&) const = default;
};

struct LatencyModel {
    std::vector<ActionTiming> per_action;  // indexed like the manifests
    double warm_overhead = 0.010;
    double rent_overhead = 0.010;
    double restore_startup = 0.040;
    double catalyzer_startup = 0.030;
    double sched_decision = 15e-6;

    void validate() const {
        for (std::size_t i = 0; i < per_action.size(); ++i) {
            per_action[i].cold_startup.validate("action " + std::to_string(i) + " cold_startup");
            per_action[i].exec_time.validate("action " + std::to_string(i) + " exec_time");
        }
        for (double v : {warm_overhead, rent_overhead, restore_startup, catalyzer_startup, sched_decision})
            require(std::isfinite(v) && v > 0.0, Errc::ConfigError, "latency constants must be positive");
    }
    bool operator==(const LatencyModel&) const = default;
};

}  // namespace pagurus
