#pragma once

// Line-delimited audit trail: `timestamp event_kind actor container_id detail`.
// Besides recording, the log checks that a container only exposes the
// executing action's own code and data.

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "pagurus/container.hpp"

namespace pagurus {

enum class AuditKind { Promote, Match, Handoff, Recycle, Invoke, Violation };
inline constexpr std::size_t kAuditKinds = 6;

constexpr const char* to_string(AuditKind k) noexcept {
    switch (k) {
    case AuditKind::Promote: return "promote";
    case AuditKind::Match: return "match";
    case AuditKind::Handoff: return "handoff";
    case AuditKind::Recycle: return "recycle";
    case AuditKind::Invoke: return "invoke";
    case AuditKind::Violation: return "violation";
    }
    return "?";
}

struct AuditRecord {
    double time = 0.0;
    AuditKind kind = AuditKind::Invoke;
    std::string actor;
    ContainerId container = 0;
    std::string detail;
};

inline std::string format_audit_line(const AuditRecord& r) {
    char head[64];
    std::snprintf(head, sizeof head, "%.6f ", r.time);
    std::string line = head;
    line += to_string(r.kind);
    line += ' ';
    line += r.actor.empty() ? "-" : r.actor;
    line += ' ';
    line += std::to_string(r.container);
    line += ' ';
    line += r.detail.empty() ? "-" : r.detail;
    return line;
}

class AuditLog {
public:
    explicit AuditLog(std::vector<std::string> action_names = {}, bool keep_records = false)
        : names_(std::move(action_names)), keep_(keep_records) {}

    void set_keep_records(bool keep) noexcept { keep_ = keep; }

    void record(double time, AuditKind kind, ActionId actor, ContainerId id, std::string detail = {}) {
        ++counts_[static_cast<std::size_t>(kind)];
        if (keep_) records_.push_back({time, kind, name(actor), id, std::move(detail)});
    }

    /// Called before `executing` runs in `c` (after a handoff or at invoke).
    /// Anything readable in the container must belong to `executing`.
    bool check_access(const Container& c, ActionId executing, double time) {
        const bool code_ok = c.resident_code == executing;
        const bool data_ok = c.resident_data == kNoAction || c.resident_data == executing;
        if (code_ok && data_ok) return true;
        ++violations_;
        record(time, AuditKind::Violation, executing, c.id,
               "code=" + name(c.resident_code) + ",data=" + name(c.resident_data));
        return false;
    }

    std::size_t count(AuditKind k) const noexcept { return counts_[static_cast<std::size_t>(k)]; }
    std::size_t violations() const noexcept { return violations_; }
    const std::vector<AuditRecord>& records() const noexcept { return records_; }

    std::string lines() const {
        std::string out;
        for (const auto& r : records_) out += format_audit_line(r) + "\n";
        return out;
    }

    std::string name(ActionId a) const {
        if (a == kNoAction) return "-";
        return a < names_.size() ? names_[a] : "#" + std::to_string(a);
    }

private:
    std::vector<std::string> names_;
    bool keep_;
    std::array<std::size_t, kAuditKinds> counts_{};
    std::size_t violations_ = 0;
    std::vector<AuditRecord> records_;
};

}  // namespace pagurus
