#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pagurus {

enum class Errc {
    InvalidParam,
    UnstableQueue,
    EmptyWindow,
    DuplicateAction,
    MalformedManifest,
    EmptyVector,
    UnknownAction,
    PlanMismatch,
    IllegalTransition,
    StaleContainer,
    WrongAuthority,
    EmptyHistogram,
    MissingBaseline,
    MismatchedRuns,
    ConfigError,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::InvalidParam: return "InvalidParam";
    case Errc::UnstableQueue: return "UnstableQueue";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::DuplicateAction: return "DuplicateAction";
    case Errc::MalformedManifest: return "MalformedManifest";
    case Errc::EmptyVector: return "EmptyVector";
    case Errc::UnknownAction: return "UnknownAction";
    case Errc::PlanMismatch: return "PlanMismatch";
    case Errc::IllegalTransition: return "IllegalTransition";
    case Errc::StaleContainer: return "StaleContainer";
    case Errc::WrongAuthority: return "WrongAuthority";
    case Errc::EmptyHistogram: return "EmptyHistogram";
    case Errc::MissingBaseline: return "MissingBaseline";
    case Errc::MismatchedRuns: return "MismatchedRuns";
    case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, Errc code, const std::string& what) {
    if (!condition) fail(code, what);
}

}  // namespace pagurus
