#include "pagurus/sealed.hpp"

#include <gtest/gtest.h>

#include "support/expect_errc.hpp"

namespace pagurus {
namespace {

TEST(Sealed, RoundTrip) {
    const auto code = to_bytes("print('hello')\nimport numpy\n");
    const Authority user{KeyKind::UserKey, "alice"};
    const auto s = seal(code, "vid", user);
    EXPECT_EQ(s.owner(), "vid");
    EXPECT_EQ(s.sealed_with(), KeyKind::UserKey);
    EXPECT_EQ(s.size(), code.size());
    EXPECT_EQ(unseal(s, user), code);
}

TEST(Sealed, WrongAuthorityIsRejected) {
    const auto s = seal(to_bytes("secret"), "kms", controller_authority());
    EXPECT_ERRC(unseal(s, Authority{KeyKind::UserKey, "controller"}), Errc::WrongAuthority);
    EXPECT_ERRC(unseal(s, Authority{KeyKind::ControllerKey, "someone-else"}), Errc::WrongAuthority);
}

TEST(Sealed, EntriesAreIsolatedAndRenamed) {
    const auto a = seal(to_bytes("code of a"), "a", controller_authority());
    const auto b = seal(to_bytes("code of b"), "b", controller_authority());
    EXPECT_EQ(unseal(a, controller_authority()), to_bytes("code of a"));
    EXPECT_EQ(a.canonical_name(), b.canonical_name());
    EXPECT_EQ(b.owner(), "b");
    // the same payload sealed for different owners never looks the same
    const auto a2 = seal(to_bytes("same"), "a", controller_authority());
    const auto b2 = seal(to_bytes("same"), "b", controller_authority());
    EXPECT_NE(unseal(a2, controller_authority()), Bytes{});
    EXPECT_EQ(unseal(a2, controller_authority()), unseal(b2, controller_authority()));
}

}  // namespace
}  // namespace pagurus
