#pragma once

// M/M/n analysis behind idle-container identification.
//
// A QueueModel is a snapshot (arrival rate, per-container service rate,
// container count). All quantities are closed forms of the stationary M/M/n
// queue; factorial terms are combined in log space so that n up to 64 (and
// beyond) does not overflow.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pagurus/error.hpp"

namespace pagurus {

struct QueueModel {
    double arrival_rate = 0.0;  // queries per second
    double service_rate = 0.0;  // completions per second per container
    int servers = 1;

    double traffic_density() const noexcept {
        return arrival_rate / (static_cast<double>(servers) * service_rate);
    }

    QueueModel with_servers(int n) const noexcept { return {arrival_rate, service_rate, n}; }
};

struct QosSpec {
    double latency_target = 0.0;       // T_D, seconds
    double required_percentile = 0.0;  // r_req in (0, 1)
    double measured_percentile = 1.0;  // r_real(n) in [0, 1]
};

enum class IdleDecision { CanLend, MustKeep, QosViolated };

/// Which expression the second idle criterion evaluates.
///  - Consistent: the waiting-time CDF of an (n-1)-container model.
///  - Literal: the printed hybrid, pi_n and rho from the n-container model
///    with the (n-1) exponent.
enum class DiscriminantForm { Consistent, Literal };

constexpr const char* to_string(IdleDecision d) noexcept {
    switch (d) {
    case IdleDecision::CanLend: return "CanLend";
    case IdleDecision::MustKeep: return "MustKeep";
    case IdleDecision::QosViolated: return "QosViolated";
    }
    return "?";
}

namespace detail {

inline void validate_rates(const QueueModel& m) {
    require(std::isfinite(m.arrival_rate) && m.arrival_rate > 0.0, Errc::InvalidParam,
            "arrival rate must be positive");
    require(std::isfinite(m.service_rate) && m.service_rate > 0.0, Errc::InvalidParam,
            "service rate must be positive");
    require(m.servers >= 1, Errc::InvalidParam, "need at least one server");
}

inline void validate_stable(const QueueModel& m) {
    validate_rates(m);
    const double rho = m.traffic_density();
    require(rho < 1.0, Errc::UnstableQueue,
            "traffic density " + std::to_string(rho) + " >= 1 at n=" + std::to_string(m.servers));
}

// log of the k-th unnormalised stationary term for k <= n.
inline double log_term_below(double offered, int k) {
    return k * std::log(offered) - std::lgamma(k + 1.0);
}

inline double log_pi0(const QueueModel& m) {
    const int n = m.servers;
    const double rho = m.traffic_density();
    const double offered = m.arrival_rate / m.service_rate;  // n * rho
    // terms k = 0..n-1 plus the geometric tail starting at k = n.
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k < n; ++k) logs.push_back(log_term_below(offered, k));
    logs.push_back(log_term_below(offered, n) - std::log1p(-rho));
    for (double v : logs) peak = std::max(peak, v);
    double sum = 0.0;
    for (double v : logs) sum += std::exp(v - peak);
    return -(peak + std::log(sum));
}

inline double log_pi(const QueueModel& m, double log_p0, std::size_t k) {
    const int n = m.servers;
    const double offered = m.arrival_rate / m.service_rate;
    if (k < static_cast<std::size_t>(n)) return log_p0 + log_term_below(offered, static_cast<int>(k));
    const double rho = m.traffic_density();
    return log_p0 + n * std::log(static_cast<double>(n)) + static_cast<double>(k) * std::log(rho) -
           std::lgamma(n + 1.0);
}

}  // namespace detail

/// pi_0..pi_{k_max}; the mass beyond k_max is the geometric tail
/// pi_{k_max} * rho / (1 - rho).
inline std::vector<double> stationary_distribution(const QueueModel& model, std::size_t k_max) {
    detail::validate_stable(model);
    const double lp0 = detail::log_pi0(model);
    std::vector<double> pi(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) pi[k] = std::exp(detail::log_pi(model, lp0, k));
    return pi;
}

/// P{all n containers busy} = pi_n / (1 - rho), the Erlang-C probability.
inline double prob_wait(const QueueModel& model) {
    detail::validate_stable(model);
    const double lp0 = detail::log_pi0(model);
    const auto n = static_cast<std::size_t>(model.servers);
    return std::exp(detail::log_pi(model, lp0, n) - std::log1p(-model.traffic_density()));
}

inline double prob_no_wait(const QueueModel& model) {
    const double p = 1.0 - prob_wait(model);
    if (p < -1e-12) fail(Errc::InvalidParam, "negative no-wait probability");
    return std::max(p, 0.0);
}

/// F_w(t) = 1 - pi_n/(1-rho) * exp(-n mu (1-rho) t) for t > 0.
inline double waiting_time_cdf(const QueueModel& model, double t) {
    require(t > 0.0, Errc::InvalidParam, "waiting time must be positive; use prob_no_wait for t=0");
    const double c = prob_wait(model);
    const double decay = model.servers * model.service_rate * (1.0 - model.traffic_density());
    return 1.0 - c * std::exp(-decay * t);
}

/// The second idle criterion, f(n-1). Negative infinity when n-1 containers
/// cannot even keep the queue stable.
inline double discriminant_margin(const QueueModel& model, const QosSpec& qos,
                                  DiscriminantForm form = DiscriminantForm::Consistent) {
    const double budget = qos.latency_target - 1.0 / model.service_rate;
    const int reduced = model.servers - 1;
    if (reduced < 1) return -std::numeric_limits<double>::infinity();
    if (form == DiscriminantForm::Literal) {
        const double rho = model.traffic_density();
        const double c = prob_wait(model);
        return 1.0 - qos.required_percentile -
               c * std::exp(-reduced * model.service_rate * (1.0 - rho) * budget);
    }
    const QueueModel smaller = model.with_servers(reduced);
    if (smaller.traffic_density() >= 1.0) return -std::numeric_limits<double>::infinity();
    return waiting_time_cdf(smaller, budget) - qos.required_percentile;
}

/// Decides whether one of the model's n containers can be given up.
inline IdleDecision idle_discriminant(const QueueModel& model, const QosSpec& qos,
                                      DiscriminantForm form = DiscriminantForm::Consistent) {
    detail::validate_stable(model);
    require(qos.required_percentile > 0.0 && qos.required_percentile < 1.0, Errc::InvalidParam,
            "required percentile must lie in (0,1)");
    require(qos.measured_percentile >= 0.0 && qos.measured_percentile <= 1.0, Errc::InvalidParam,
            "measured percentile must lie in [0,1]");
    require(qos.latency_target > 1.0 / model.service_rate, Errc::InvalidParam,
            "latency target must exceed the mean execution time");

    if (qos.measured_percentile < qos.required_percentile) return IdleDecision::QosViolated;
    if (model.servers <= 1) return IdleDecision::MustKeep;
    return discriminant_margin(model, qos, form) >= 0.0 ? IdleDecision::CanLend
                                                        : IdleDecision::MustKeep;
}

struct Observation {
    double arrival_time = 0.0;
    double service_duration = 0.0;
};

struct RateEstimate {
    double arrival_rate = 0.0;
    double service_rate = 0.0;
};

/// lambda = count / span, mu = 1 / mean service duration.
inline RateEstimate estimate_rates(std::span<const Observation> window, double span) {
    require(!window.empty(), Errc::EmptyWindow, "no observations in the estimation window");
    require(std::isfinite(span) && span > 0.0, Errc::InvalidParam, "window span must be positive");
    double total = 0.0;
    for (const auto& o : window) {
        require(std::isfinite(o.service_duration) && o.service_duration >= 0.0, Errc::InvalidParam,
                "service durations must be non-negative");
        total += o.service_duration;
    }
    require(total > 0.0, Errc::InvalidParam, "mean service duration must be positive");
    const auto count = static_cast<double>(window.size());
    return {count / span, count / total};
}

}  // namespace pagurus
