#include <gtest/gtest.h>

#include "support.hpp"
#include "trbac/authn.hpp"
#include "trbac/error.hpp"
#include "trbac/policy_handle.hpp"

namespace trbac {
namespace {

using test::kAcme;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

TEST(Pbkdf2, KnownVector) {
  const std::string salt = "salt";
  Bytes dk = derive_key("passwd", std::span(reinterpret_cast<const std::uint8_t*>(salt.data()), salt.size()), 1, 64);
  EXPECT_EQ(to_hex(dk),
            "55ac046e56e3089fec1691c22544b605f94185216dde0465e68b9d57c20dacbc"
            "49ca9cccf179b645991664b39d77ef317c71b845b1e30bd509112041d3a19783");
}

TEST(Pbkdf2, HexRoundTrip) {
  Bytes b = random_bytes(33);
  EXPECT_EQ(from_hex(to_hex(b)), b);
  EXPECT_EQ(random_token().size(), 64u);
  EXPECT_NE(random_token(), random_token());
  EXPECT_THROW(from_hex("abc"), Error);
  EXPECT_THROW(from_hex("zz"), Error);
}

TEST(Credential, VerifyAndSaltUniqueness) {
  CredentialRecord a = make_credential(kAcme, UserId("bob"), "correct horse", 500);
  CredentialRecord b = make_credential(kAcme, UserId("bob"), "correct horse", 500);
  EXPECT_EQ(a.algorithm_tag, "pbkdf2-sha256");
  EXPECT_EQ(a.salt.size(), kSaltBytes);
  EXPECT_EQ(a.digest.size(), kDigestBytes);
  EXPECT_NE(a.salt, b.salt);
  EXPECT_NE(a.digest, b.digest);
  EXPECT_TRUE(verify_password(a, "correct horse"));
  EXPECT_FALSE(verify_password(a, "correct horsf"));
  EXPECT_FALSE(verify_password(a, ""));
  CredentialRecord odd = a;
  odd.algorithm_tag = "md5";
  EXPECT_FALSE(verify_password(odd, "correct horse"));
}

class AuthnTest : public ::testing::Test {
 protected:
  AuthnTest()
      : handle(test::sample_policy()),
        authn(handle, credentials, sessions, alerts.emitter(), options(), clock.as_clock()) {}

  static AuthnOptions options() {
    AuthnOptions o;
    o.hash_iterations = 1000;
    return o;
  }

  void enroll(const std::string& name, const std::string& employee, const std::string& pw) {
    auto p = authn.register_user(kAcme, name, "clerk", employee);
    authn.set_password(p.token, pw);
  }

  ManualClock clock;
  PolicyHandle handle;
  CredentialStore credentials;
  SessionRegistry sessions;
  test::AlertRecorder alerts;
  Authenticator authn;
};

TEST_F(AuthnTest, RegistrationFlow) {
  PendingRegistration p = authn.register_user(kAcme, "Bob Tran", "clerk", "E200");
  EXPECT_EQ(p.user, UserId("bob"));
  EXPECT_EQ(p.expires_at, clock.now() + std::chrono::minutes(10));
  CredentialRecord rec = authn.set_password(p.token, "s3cret-pass");
  EXPECT_EQ(rec.user, UserId("bob"));
  EXPECT_EQ(rec.iterations, 1000);
  EXPECT_TRUE(credentials.contains(kAcme, UserId("bob")));
  EXPECT_EQ(alerts.size(), 0u);

  Session s = authn.authenticate(kAcme, UserId("bob"), "s3cret-pass", LocationId("hq"));
  EXPECT_EQ(s.active_roles, (std::set<RoleId>{RoleId("clerk")}));
  EXPECT_EQ(s.expires_at, clock.now() + std::chrono::minutes(30));
  EXPECT_TRUE(sessions.find(s.token).has_value());
}

TEST_F(AuthnTest, DirectoryMismatchAlertsOnce) {
  EXPECT_EQ(code_of([&] { authn.register_user(kAcme, "Bob Tron", "clerk", "E200"); }),
            ErrorCode::kDirectoryMismatch);
  ASSERT_EQ(alerts.size(), 1u);
  EXPECT_EQ(alerts.records()[0].kind, AlertKind::kUnauthorizedAttempt);
  EXPECT_EQ(alerts.records()[0].endpoint, "/v1/register");
  EXPECT_EQ(code_of([&] { authn.register_user(kAcme, "Nobody", "clerk", "E777"); }),
            ErrorCode::kDirectoryMismatch);
  EXPECT_EQ(alerts.size(), 2u);
}

TEST_F(AuthnTest, UnknownTenantHasNoAlertSink) {
  EXPECT_EQ(code_of([&] { authn.register_user(TenantId("nowhere"), "Bob Tran", "clerk", "E200"); }),
            ErrorCode::kUnknownTenant);
  EXPECT_EQ(alerts.size(), 0u);
}

TEST_F(AuthnTest, WeakPasswordKeepsPending) {
  auto p = authn.register_user(kAcme, "Bob Tran", "clerk", "E200");
  EXPECT_EQ(code_of([&] { authn.set_password(p.token, "short"); }), ErrorCode::kWeakPassword);
  EXPECT_NO_THROW(authn.set_password(p.token, "long-enough"));
  // Consumed.
  EXPECT_EQ(code_of([&] { authn.set_password(p.token, "long-enough"); }),
            ErrorCode::kPendingExpired);
}

TEST_F(AuthnTest, PendingExpires) {
  auto p = authn.register_user(kAcme, "Bob Tran", "clerk", "E200");
  clock.advance(std::chrono::minutes(10));
  EXPECT_EQ(code_of([&] { authn.set_password(p.token, "long-enough"); }),
            ErrorCode::kPendingExpired);
  EXPECT_EQ(alerts.size(), 1u);
  EXPECT_FALSE(credentials.contains(kAcme, UserId("bob")));
}

TEST_F(AuthnTest, SecondRegistrationRejected) {
  enroll("Bob Tran", "E200", "long-enough");
  EXPECT_EQ(code_of([&] { authn.register_user(kAcme, "Bob Tran", "clerk", "E200"); }),
            ErrorCode::kAlreadyRegistered);
  EXPECT_EQ(alerts.size(), 1u);
}

TEST_F(AuthnTest, LoginFailuresAreUniform) {
  enroll("Bob Tran", "E200", "long-enough");
  std::string wrong, unknown;
  try {
    authn.authenticate(kAcme, UserId("bob"), "wrong-password", LocationId("hq"));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadCredentials);
    wrong = e.what();
  }
  try {
    authn.authenticate(kAcme, UserId("mallory"), "wrong-password", LocationId("hq"));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadCredentials);
    unknown = e.what();
  }
  EXPECT_EQ(wrong, unknown);
  ASSERT_EQ(alerts.size(), 2u);
  for (const AlertRecord& r : alerts.records()) {
    EXPECT_EQ(r.kind, AlertKind::kUnauthorizedAttempt);
  }
}

TEST_F(AuthnTest, NotActivated) {
  EXPECT_EQ(code_of([&] {
              authn.authenticate(kAcme, UserId("carol"), "whatever12", LocationId("hq"));
            }),
            ErrorCode::kAccountNotActivated);
  EXPECT_EQ(alerts.size(), 1u);
}

TEST_F(AuthnTest, LocationEnforcementIsOptional) {
  enroll("Bob Tran", "E200", "long-enough");
  EXPECT_NO_THROW(authn.authenticate(kAcme, UserId("bob"), "long-enough", LocationId("branch")));

  AuthnOptions strict = options();
  strict.enforce_location_at_login = true;
  Authenticator gated(handle, credentials, sessions, alerts.emitter(), strict, clock.as_clock());
  EXPECT_EQ(code_of([&] {
              gated.authenticate(kAcme, UserId("bob"), "long-enough", LocationId("branch"));
            }),
            ErrorCode::kLocationForbidden);
  EXPECT_NO_THROW(gated.authenticate(kAcme, UserId("bob"), "long-enough", LocationId("hq")));
}

TEST(SessionRegistryTest, PurgeExpired) {
  SessionRegistry reg;
  ManualClock clock;
  Session s;
  s.token = "t1";
  s.expires_at = clock.now() + std::chrono::seconds(5);
  reg.insert(s);
  EXPECT_FALSE(reg.find("t1")->expired(clock.now()));
  clock.advance(std::chrono::seconds(5));
  EXPECT_TRUE(reg.find("t1")->expired(clock.now()));
  reg.purge_expired(clock.now());
  EXPECT_EQ(reg.size(), 0u);
}

}  // namespace
}  // namespace trbac
