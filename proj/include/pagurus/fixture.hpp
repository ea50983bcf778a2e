#pragma once

// The 11-benchmark fixture. Library lists are approximations: real dependency
// lists are not published, so these only encode which benchmarks lean on
// popular packages (Pillow, numpy, scikit-learn) and which on rare ones.

#include <string>
#include <string_view>
#include <vector>

#include "pagurus/latency.hpp"
#include "pagurus/manifest.hpp"
#include "pagurus/repack.hpp"

namespace pagurus::fixture {

inline const std::vector<std::string>& action_nl_names() {
    static const std::vector<std::string> names{"dd", "fop", "lp", "mm", "cdb", "clou"};
    return names;
}

inline const std::vector<std::string>& action_l_names() {
    static const std::vector<std::string> names{"vid", "kms", "img", "md", "mr"};
    return names;
}

inline std::vector<RawManifest> raw_benchmarks() {
    std::vector<RawManifest> raw;
    for (const auto& n : action_nl_names()) raw.push_back({n, {}, false, false, 0});
    const auto add = [&raw](std::string name,
                            std::vector<std::pair<std::string, std::optional<std::string>>> libs) {
        raw.push_back({std::move(name), std::move(libs), true, false, 0});
    };
    add("vid", {{"Pillow", "8.1.0"}, {"numpy", "1.19.5"}, {"opencv-python", "4.5.1"}});
    add("kms", {{"scikit-learn", "0.24.1"}, {"numpy", "1.19.5"}, {"scipy", "1.6.0"}});
    add("img", {{"Pillow", "8.1.0"}, {"six", "1.12.0"}});
    add("md", {{"markdown2", "2.4.0"}, {"pygments", "2.7.4"}, {"six", "1.15.0"}});
    add("mr", {{"mrjob", "0.7.4"}, {"numpy", "1.16.6"}, {"pyyaml", "5.4.1"}});
    return raw;
}

inline std::vector<LibraryManifest> benchmarks() { return ingest_manifests(raw_benchmarks()); }

/// Same eleven names, none with extra libraries.
inline std::vector<LibraryManifest> empty_benchmarks() {
    auto raw = raw_benchmarks();
    for (auto& r : raw) {
        r.libraries.clear();
        r.declared_l = false;
    }
    return ingest_manifests(raw);
}

inline BuildCosts build_costs() {
    BuildCosts c;
    c.per_library = {{"Pillow", 1.5},       {"numpy", 2.0},    {"opencv-python", 3.5},
                     {"scikit-learn", 3.0}, {"scipy", 3.0},    {"six", 0.3},
                     {"markdown2", 0.5},    {"pygments", 1.0}, {"mrjob", 1.5},
                     {"pyyaml", 0.5}};
    return c;
}

inline constexpr int kDefaultRenterPool = 2;

struct Timing {
    const char* action;
    double cold_mean;  // seconds, lognormal with log-sd 0.1
    double exec_mean;  // seconds, exponential
};

// Inputs rather than measurements: cold startups of 1-3 s and executions
// from 0.1 s (dd, mostly startup) to about 1.3 s (cdb, about half startup).
inline const std::vector<Timing>& timings() {
    static const std::vector<Timing> t{
        {"dd", 1.50, 0.099}, {"fop", 1.40, 0.20}, {"lp", 1.60, 0.45}, {"mm", 1.60, 0.60},
        {"cdb", 1.20, 1.29}, {"clou", 1.50, 0.30}, {"vid", 2.60, 1.20}, {"kms", 2.40, 0.80},
        {"img", 2.10, 0.35}, {"md", 1.80, 0.25},  {"mr", 2.00, 0.90},
    };
    return t;
}

inline const Timing& timing(std::string_view action) {
    for (const auto& t : timings())
        if (action == t.action) return t;
    fail(Errc::UnknownAction, "no fixture timing for '" + std::string(action) + "'");
}

inline ActionTiming action_timing(std::string_view action) {
    const auto& t = timing(action);
    return {Distribution::lognormal(t.cold_mean, 0.1), Distribution::exponential(t.exec_mean)};
}

/// Target latency: five mean executions.
inline double latency_target(std::string_view action) { return 5.0 * timing(action).exec_mean; }

inline constexpr double kRequiredPercentile = 0.95;

}  // namespace pagurus::fixture
