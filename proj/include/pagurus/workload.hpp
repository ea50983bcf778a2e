#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "pagurus/error.hpp"
#include "pagurus/random.hpp"

namespace pagurus {

enum class ArrivalKind { Poisson, Diurnal, Burst, FixedInterval };

constexpr const char* to_string(ArrivalKind k) noexcept {
    switch (k) {
    case ArrivalKind::Poisson: return "poisson";
    case ArrivalKind::Diurnal: return "diurnal";
    case ArrivalKind::Burst: return "burst";
    case ArrivalKind::FixedInterval: return "fixed-interval";
    }
    return "?";
}

struct ArrivalProcess {
    ArrivalKind kind = ArrivalKind::Poisson;
    double rate = 1.0;        // Poisson, and the base rate of Burst
    double low = 0.0;         // Diurnal
    double peak = 0.0;        // Diurnal
    double period = 60.0;     // Diurnal cycle, FixedInterval spacing
    double multiplier = 1.0;  // Burst
    double burst_start = 0.0;
    double burst_end = 0.0;
    double offset = 0.0;      // FixedInterval: arrivals at offset + k * period, k >= 1

    static ArrivalProcess poisson(double rate) { return {ArrivalKind::Poisson, rate}; }
    static ArrivalProcess diurnal(double low, double peak, double period) {
        ArrivalProcess p{ArrivalKind::Diurnal};
        p.low = low;
        p.peak = peak;
        p.period = period;
        return p;
    }
    static ArrivalProcess burst(double rate, double multiplier, double start, double end) {
        ArrivalProcess p{ArrivalKind::Burst, rate};
        p.multiplier = multiplier;
        p.burst_start = start;
        p.burst_end = end;
        return p;
    }
    static ArrivalProcess fixed_interval(double period, double offset = 0.0) {
        ArrivalProcess p{ArrivalKind::FixedInterval};
        p.period = period;
        p.offset = offset;
        return p;
    }

    /// Instantaneous rate at time t (queries per second).
    double rate_at(double t) const noexcept {
        switch (kind) {
        case ArrivalKind::Poisson: return rate;
        case ArrivalKind::Diurnal:
            return low + (peak - low) * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * t / period));
        case ArrivalKind::Burst: return t >= burst_start && t < burst_end ? rate * multiplier : rate;
        case ArrivalKind::FixedInterval: return t > offset ? 1.0 / period : 0.0;
        }
        return 0.0;
    }

    void validate(const std::string& what) const {
        const auto bad = [&](const char* why) { fail(Errc::ConfigError, what + ": " + why); };
        switch (kind) {
        case ArrivalKind::Poisson:
            if (!(rate > 0.0)) bad("rate must be positive");
            break;
        case ArrivalKind::Diurnal:
            if (!(low >= 0.0 && peak > 0.0 && low <= peak)) bad("need 0 <= low <= peak, peak > 0");
            if (!(period > 0.0)) bad("period must be positive");
            break;
        case ArrivalKind::Burst:
            if (!(rate > 0.0)) bad("rate must be positive");
            if (!(multiplier >= 1.0)) bad("multiplier must be at least 1");
            if (!(burst_end >= burst_start && burst_start >= 0.0)) bad("burst window is inverted");
            break;
        case ArrivalKind::FixedInterval:
            if (!(period > 0.0)) bad("period must be positive");
            if (!(offset >= 0.0)) bad("offset must be non-negative");
            break;
        }
    }
    bool operator==(const ArrivalProcess&) const = default;
};

/// Arrival times in (0, duration].
inline std::vector<double> sample_arrivals(const ArrivalProcess& p, double duration, std::uint64_t seed) {
    require(duration > 0.0, Errc::InvalidParam, "duration must be positive");
    p.validate("arrival process");
    std::vector<double> out;
    if (p.kind == ArrivalKind::FixedInterval) {
        for (long k = 1;; ++k) {
            const double t = p.offset + static_cast<double>(k) * p.period;
            if (t > duration + 1e-9 * duration) break;
            out.push_back(t);
        }
        return out;
    }
    Rng rng(derive_seed(seed, "arrivals"));
    if (p.kind == ArrivalKind::Poisson) {
        for (double t = rng.exponential(p.rate); t <= duration; t += rng.exponential(p.rate)) out.push_back(t);
        return out;
    }
    // thinning against the maximum rate
    const double top = p.kind == ArrivalKind::Diurnal ? p.peak : p.rate * p.multiplier;
    for (double t = rng.exponential(top); t <= duration; t += rng.exponential(top))
        if (rng.uniform() * top < p.rate_at(t)) out.push_back(t);
    return out;
}

struct ActionLoad {
    std::string action;
    ArrivalProcess process;
    bool operator==(const ActionLoad&) const = default;
};

struct WorkloadSpec {
    std::vector<ActionLoad> loads;
    double duration = 600.0;
    std::uint64_t seed = 1;
    bool operator==(const WorkloadSpec&) const = default;
};

}  // namespace pagurus
