#pragma once

// MetricsReport documents (JSON), the summary table and the line records
// `action,path,count,p50,p95,p99,r_real`.

#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pagurus/error.hpp"
#include "pagurus/metrics.hpp"

namespace pagurus {

inline nlohmann::json to_json(const QueryRecord& q) {
    return nlohmann::json::array({q.action, q.index, q.arrival, q.wait, q.startup, q.exec, q.latency, to_string(q.path)});
}

inline nlohmann::json to_json(const ActionStats& s) {
    nlohmann::json paths;
    for (std::size_t i = 0; i < kStartPaths; ++i) paths[to_string(static_cast<StartPath>(i))] = s.paths[i];
    return {{"action", s.action},
            {"latency_target", s.latency_target},
            {"arrivals", s.arrivals},
            {"completed", s.completed},
            {"paths", paths},
            {"p50", s.p50},
            {"p95", s.p95},
            {"p99", s.p99},
            {"mean_latency", s.mean_latency},
            {"mean_startup", s.mean_startup},
            {"mean_exec", s.mean_exec},
            {"mean_wait", s.mean_wait},
            {"r_real", s.r_real},
            {"r_real_window", s.r_real_window},
            {"launches", s.launches},
            {"peak_containers", s.peak_containers}};
}

inline nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json actions = nlohmann::json::array();
    for (const auto& a : r.actions) actions.push_back(to_json(a));
    nlohmann::json queries = nlohmann::json::array();
    for (const auto& q : r.queries) queries.push_back(to_json(q));
    return {{"policy", r.policy},
            {"seed", r.seed},
            {"workload_fingerprint", r.workload_fingerprint},
            {"duration", r.duration},
            {"actions", actions},
            {"container_memory_mb", r.container_memory_mb},
            {"memory_time_mb_s", r.memory_time_mb_s},
            {"peak_memory_mb", r.peak_memory_mb},
            {"peak_containers", r.peak_containers},
            {"standing_memory_mb", r.standing_memory_mb},
            {"launches", r.launches},
            {"audit", r.audit},
            {"audit_violations", r.audit_violations},
            {"arrivals", r.arrivals},
            {"completions", r.completions},
            {"in_flight", r.in_flight},
            {"rejected", r.rejected},
            {"events", r.events},
            {"trace_hash", r.trace_hash},
            {"queries", queries}};
}

namespace detail {

inline StartPath path_from_json(const nlohmann::json& j) {
    const auto p = start_path_from(j.get<std::string>());
    if (!p) fail(Errc::ConfigError, "unknown start path '" + j.get<std::string>() + "'");
    return *p;
}

}  // namespace detail

inline MetricsReport report_from_json(const nlohmann::json& j) {
    try {
        MetricsReport r;
        r.policy = j.at("policy").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.workload_fingerprint = j.at("workload_fingerprint").get<std::uint64_t>();
        r.duration = j.at("duration").get<double>();
        for (const auto& a : j.at("actions")) {
            ActionStats s;
            s.action = a.at("action").get<std::string>();
            s.latency_target = a.at("latency_target").get<double>();
            s.arrivals = a.at("arrivals").get<std::uint64_t>();
            s.completed = a.at("completed").get<std::uint64_t>();
            for (std::size_t i = 0; i < kStartPaths; ++i)
                s.paths[i] = a.at("paths").at(to_string(static_cast<StartPath>(i))).get<std::uint64_t>();
            s.p50 = a.at("p50").get<double>();
            s.p95 = a.at("p95").get<double>();
            s.p99 = a.at("p99").get<double>();
            s.mean_latency = a.at("mean_latency").get<double>();
            s.mean_startup = a.at("mean_startup").get<double>();
            s.mean_exec = a.at("mean_exec").get<double>();
            s.mean_wait = a.at("mean_wait").get<double>();
            s.r_real = a.at("r_real").get<double>();
            s.r_real_window = a.at("r_real_window").get<double>();
            s.launches = a.at("launches").get<std::uint64_t>();
            s.peak_containers = a.at("peak_containers").get<std::uint64_t>();
            r.actions.push_back(std::move(s));
        }
        r.container_memory_mb = j.at("container_memory_mb").get<double>();
        r.memory_time_mb_s = j.at("memory_time_mb_s").get<double>();
        r.peak_memory_mb = j.at("peak_memory_mb").get<double>();
        r.peak_containers = j.at("peak_containers").get<std::uint64_t>();
        r.standing_memory_mb = j.at("standing_memory_mb").get<double>();
        r.launches = j.at("launches").get<std::map<std::string, std::uint64_t>>();
        r.audit = j.at("audit").get<std::map<std::string, std::uint64_t>>();
        r.audit_violations = j.at("audit_violations").get<std::uint64_t>();
        r.arrivals = j.at("arrivals").get<std::uint64_t>();
        r.completions = j.at("completions").get<std::uint64_t>();
        r.in_flight = j.at("in_flight").get<std::uint64_t>();
        r.rejected = j.at("rejected").get<std::uint64_t>();
        r.events = j.at("events").get<std::uint64_t>();
        r.trace_hash = j.at("trace_hash").get<std::uint64_t>();
        for (const auto& q : j.at("queries")) {
            QueryRecord rec;
            rec.action = q.at(0).get<std::uint32_t>();
            rec.index = q.at(1).get<std::uint32_t>();
            rec.arrival = q.at(2).get<double>();
            rec.wait = q.at(3).get<double>();
            rec.startup = q.at(4).get<double>();
            rec.exec = q.at(5).get<double>();
            rec.latency = q.at(6).get<double>();
            rec.path = detail::path_from_json(q.at(7));
            r.queries.push_back(rec);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ConfigError, std::string("malformed report document: ") + e.what());
    }
}

inline std::string write_report(const MetricsReport& r, int indent = -1) { return to_json(r).dump(indent); }

inline MetricsReport read_report(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(Errc::ConfigError, std::string("report is not valid JSON: ") + e.what());
    }
    return report_from_json(j);
}

namespace detail {

template <typename... Args>
std::string format(const char* fmt, Args... args) {
    const int n = std::snprintf(nullptr, 0, fmt, args...);
    std::string out(static_cast<std::size_t>(n), '\0');
    std::snprintf(out.data(), out.size() + 1, fmt, args...);
    return out;
}

}  // namespace detail

/// One line per (action, path) with a nonzero count. Percentiles and r_real
/// are the action's, repeated on each of its lines.
inline std::string format_records(const MetricsReport& r, bool header = true) {
    std::string out = header ? "action,path,count,p50,p95,p99,r_real\n" : "";
    for (const auto& a : r.actions) {
        for (std::size_t i = 0; i < kStartPaths; ++i) {
            if (a.paths[i] == 0) continue;
            out += detail::format("%s,%s,%llu,%.6f,%.6f,%.6f,%.4f\n", a.action.c_str(),
                                  to_string(static_cast<StartPath>(i)), static_cast<unsigned long long>(a.paths[i]),
                                  a.p50, a.p95, a.p99, a.r_real);
        }
    }
    return out;
}

inline std::string format_table(const MetricsReport& r) {
    std::string out = detail::format("policy %s  seed %llu  duration %.0fs\n", r.policy.c_str(),
                                     static_cast<unsigned long long>(r.seed), r.duration);
    out += detail::format("%-8s %7s %6s %6s %7s %6s %9s %9s %9s %7s\n", "action", "queries", "warm", "rent", "restore",
                          "cold", "p50(s)", "p95(s)", "p99(s)", "r_real");
    for (const auto& a : r.actions) {
        if (a.completed == 0) continue;
        out += detail::format("%-8s %7llu %6llu %6llu %7llu %6llu %9.4f %9.4f %9.4f %7.4f\n", a.action.c_str(),
                              static_cast<unsigned long long>(a.completed),
                              static_cast<unsigned long long>(a.count(StartPath::Warm)),
                              static_cast<unsigned long long>(a.count(StartPath::Rent)),
                              static_cast<unsigned long long>(a.count(StartPath::Restore)),
                              static_cast<unsigned long long>(a.count(StartPath::Cold)), a.p50, a.p95, a.p99, a.r_real);
    }
    out += detail::format("peak containers %llu (%.0f MB)  memory-time %.3g MB*s  standing %.0f MB\n",
                          static_cast<unsigned long long>(r.peak_containers), r.peak_memory_mb, r.memory_time_mb_s,
                          r.standing_memory_mb);
    std::string launches;
    for (const auto& [kind, n] : r.launches)
        launches += detail::format(" %s=%llu", kind.c_str(), static_cast<unsigned long long>(n));
    out += "launches" + (launches.empty() ? std::string(" none") : launches) + "\n";
    std::string audit;
    for (const auto& [kind, n] : r.audit)
        if (n) audit += detail::format(" %s=%llu", kind.c_str(), static_cast<unsigned long long>(n));
    out += detail::format("audit%s  violations=%llu\n", audit.empty() ? " none" : audit.c_str(),
                          static_cast<unsigned long long>(r.audit_violations));
    return out;
}

}  // namespace pagurus
