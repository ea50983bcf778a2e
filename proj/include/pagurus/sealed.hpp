#pragma once

// Sealed code entries. Only the access contract is modelled: the payload is
// scrambled with a key derived from the sealing authority and can only be
// read back through unseal() with that same authority.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pagurus/error.hpp"
#include "pagurus/random.hpp"

namespace pagurus {

enum class KeyKind { UserKey, ControllerKey };

struct Authority {
    KeyKind kind = KeyKind::ControllerKey;
    std::string principal;
    bool operator==(const Authority&) const = default;
};

inline Authority controller_authority() { return {KeyKind::ControllerKey, "controller"}; }

// every entry point is renamed to this before sealing
inline constexpr std::string_view kCanonicalEntryName = "__main__.py";

using Bytes = std::vector<std::uint8_t>;

class SealedCode {
public:
    const std::string& owner() const noexcept { return owner_; }
    KeyKind sealed_with() const noexcept { return authority_.kind; }
    std::string_view canonical_name() const noexcept { return kCanonicalEntryName; }
    std::size_t size() const noexcept { return blob_.size(); }

private:
    friend SealedCode seal(const Bytes&, std::string, const Authority&);
    friend Bytes unseal(const SealedCode&, const Authority&);

    std::string owner_;
    Authority authority_;
    Bytes blob_;
};

namespace detail {

inline void scramble(Bytes& data, const Authority& who, std::string_view owner) {
    Rng keystream(derive_seed(0x5EA1ULL, static_cast<int>(who.kind), who.principal, owner));
    for (std::size_t i = 0; i < data.size(); i += 8) {
        std::uint64_t k = keystream.next();
        for (std::size_t j = i; j < data.size() && j < i + 8; ++j, k >>= 8)
            data[j] ^= static_cast<std::uint8_t>(k);
    }
}

}  // namespace detail

inline SealedCode seal(const Bytes& code, std::string owner, const Authority& authority) {
    SealedCode s;
    s.owner_ = std::move(owner);
    s.authority_ = authority;
    s.blob_ = code;
    detail::scramble(s.blob_, authority, s.owner_);
    return s;
}

inline Bytes unseal(const SealedCode& entry, const Authority& authority) {
    if (!(authority == entry.authority_))
        fail(Errc::WrongAuthority, "entry of '" + entry.owner_ + "' is sealed under another key");
    Bytes out = entry.blob_;
    detail::scramble(out, authority, entry.owner_);
    return out;
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

}  // namespace pagurus
