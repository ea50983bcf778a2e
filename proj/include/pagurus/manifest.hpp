#pragma once

// Action dependency manifests and the line-delimited fixture format:
//
//   name <TAB> L|NL <TAB> lib=version,lib=version,... [<TAB> custom-image]
//
// A library given without a version (`numpy` or `numpy=`) resolves to
// "latest". Blank lines and lines starting with '#' are ignored.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pagurus/error.hpp"

namespace pagurus {

inline constexpr std::string_view kLatestVersion = "latest";

using LibrarySet = std::map<std::string, std::string>;  // name -> version

struct LibraryManifest {
    std::string action;
    LibrarySet libraries;
    bool has_extra_libraries = false;
    // Actions shipping their own image cannot be re-packed into anyone's lender.
    bool repackable = true;

    bool action_l() const noexcept { return has_extra_libraries; }
};

struct RawManifest {
    std::string action;
    std::vector<std::pair<std::string, std::optional<std::string>>> libraries;
    std::optional<bool> declared_l;  // the L|NL column, when present
    bool custom_image = false;
    int line = 0;  // 0 when not read from a file
};

/// True when both sets pin the same library to different versions. "latest"
/// is treated as its own version, so it clashes with any pinned one.
inline bool versions_conflict(const LibrarySet& a, const LibrarySet& b) {
    const LibrarySet& small = a.size() <= b.size() ? a : b;
    const LibrarySet& large = a.size() <= b.size() ? b : a;
    for (const auto& [name, version] : small) {
        auto it = large.find(name);
        if (it != large.end() && it->second != version) return true;
    }
    return false;
}

inline bool shares_library(const LibrarySet& a, const LibrarySet& b) {
    const LibrarySet& small = a.size() <= b.size() ? a : b;
    const LibrarySet& large = a.size() <= b.size() ? b : a;
    for (const auto& entry : small)
        if (large.count(entry.first)) return true;
    return false;
}

/// Version-exact inclusion.
inline bool is_subset(const LibrarySet& inner, const LibrarySet& outer) {
    for (const auto& [name, version] : inner) {
        auto it = outer.find(name);
        if (it == outer.end() || it->second != version) return false;
    }
    return true;
}

namespace detail {

inline std::string where(const RawManifest& raw) {
    std::string s = raw.line > 0 ? "line " + std::to_string(raw.line) + ": " : std::string{};
    return s + "action '" + raw.action + "'";
}

inline bool valid_identifier(std::string_view s) {
    if (s.empty()) return false;
    return std::none_of(s.begin(), s.end(), [](char c) {
        return c == ' ' || c == '\t' || c == ',' || c == '=' || c == '\n' || c == '\r';
    });
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

}  // namespace detail

inline std::vector<LibraryManifest> ingest_manifests(std::span<const RawManifest> raw) {
    std::vector<LibraryManifest> out;
    out.reserve(raw.size());
    std::set<std::string> seen;
    for (const auto& r : raw) {
        if (!detail::valid_identifier(r.action))
            fail(Errc::MalformedManifest, detail::where(r) + " has an invalid name");
        if (!seen.insert(r.action).second)
            fail(Errc::DuplicateAction, detail::where(r) + " appears more than once");
        LibraryManifest m;
        m.action = r.action;
        m.repackable = !r.custom_image;
        for (const auto& [name, version] : r.libraries) {
            if (!detail::valid_identifier(name))
                fail(Errc::MalformedManifest, detail::where(r) + " lists an invalid library name");
            std::string v = version && !version->empty() ? *version : std::string(kLatestVersion);
            if (!m.libraries.emplace(name, std::move(v)).second)
                fail(Errc::MalformedManifest, detail::where(r) + " lists library '" + name + "' twice");
        }
        m.has_extra_libraries = !m.libraries.empty();
        if (r.declared_l && *r.declared_l != m.has_extra_libraries)
            fail(Errc::MalformedManifest, detail::where(r) + " is marked " +
                                              (*r.declared_l ? "L" : "NL") + " but lists " +
                                              std::to_string(m.libraries.size()) + " libraries");
        out.push_back(std::move(m));
    }
    return out;
}

inline std::vector<RawManifest> parse_manifest_text(std::string_view text) {
    std::vector<RawManifest> out;
    int line_no = 0;
    for (auto line : detail::split(text, '\n')) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto bad = [line_no](const std::string& why) {
            fail(Errc::MalformedManifest, "line " + std::to_string(line_no) + ": " + why);
        };
        const auto cols = detail::split(line, '\t');
        if (cols.size() < 2 || cols.size() > 4) bad("expected 2 to 4 tab-separated columns");
        RawManifest r;
        r.line = line_no;
        r.action = std::string(detail::trim(cols[0]));
        const auto kind = detail::trim(cols[1]);
        if (kind == "L") r.declared_l = true;
        else if (kind == "NL") r.declared_l = false;
        else bad("kind must be L or NL, got '" + std::string(kind) + "'");
        if (cols.size() >= 3 && !detail::trim(cols[2]).empty()) {
            for (auto item : detail::split(cols[2], ',')) {
                item = detail::trim(item);
                if (item.empty()) bad("empty library entry");
                const auto eq = item.find('=');
                std::string name(detail::trim(item.substr(0, eq)));
                std::optional<std::string> version;
                if (eq != std::string_view::npos) version = std::string(detail::trim(item.substr(eq + 1)));
                if (version && version->find('=') != std::string::npos) bad("malformed entry '" + std::string(item) + "'");
                r.libraries.emplace_back(std::move(name), std::move(version));
            }
        }
        if (cols.size() == 4) {
            const auto flags = detail::trim(cols[3]);
            if (flags == "custom-image") r.custom_image = true;
            else if (!flags.empty()) bad("unknown flag '" + std::string(flags) + "'");
        }
        if (!detail::valid_identifier(r.action)) bad("invalid action name");
        out.push_back(std::move(r));
    }
    // Re-run the structural checks with line numbers attached.
    ingest_manifests(out);
    return out;
}

inline std::vector<LibraryManifest> load_manifest_text(std::string_view text) {
    const auto raw = parse_manifest_text(text);
    return ingest_manifests(raw);
}

inline std::string format_manifest_line(const LibraryManifest& m) {
    std::ostringstream os;
    os << m.action << '\t' << (m.has_extra_libraries ? "L" : "NL") << '\t';
    bool first = true;
    for (const auto& [name, version] : m.libraries) {
        if (!first) os << ',';
        first = false;
        os << name << '=' << version;
    }
    if (!m.repackable) os << "\tcustom-image";
    return os.str();
}

inline std::string format_manifests(std::span<const LibraryManifest> all) {
    std::string out;
    for (const auto& m : all) out += format_manifest_line(m) + "\n";
    return out;
}

inline const LibraryManifest* find_manifest(std::span<const LibraryManifest> all, std::string_view action) {
    for (const auto& m : all)
        if (m.action == action) return &m;
    return nullptr;
}

/// Sorted list of every library name used by any manifest.
inline std::vector<std::string> library_universe(std::span<const LibraryManifest> all) {
    std::set<std::string> names;
    for (const auto& m : all)
        for (const auto& entry : m.libraries) names.insert(entry.first);
    return {names.begin(), names.end()};
}

}  // namespace pagurus
