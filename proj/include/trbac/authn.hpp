#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trbac/alert.hpp"
#include "trbac/clock.hpp"
#include "trbac/policy.hpp"
#include "trbac/policy_handle.hpp"

namespace trbac {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::string_view kPbkdf2Sha256Tag = "pbkdf2-sha256";
inline constexpr std::int64_t kDefaultHashIterations = 100'000;
inline constexpr std::size_t kSaltBytes = 16;
inline constexpr std::size_t kDigestBytes = 32;

Bytes random_bytes(std::size_t n);
/// 256 random bits, hex encoded.
std::string random_token();

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view hex);

/// PBKDF2-HMAC-SHA256.
Bytes derive_key(std::string_view password, std::span<const std::uint8_t> salt,
                 std::int64_t iterations, std::size_t length = kDigestBytes);

struct CredentialRecord {
  TenantId tenant;
  UserId user;
  std::string algorithm_tag{kPbkdf2Sha256Tag};
  Bytes salt;
  std::int64_t iterations = kDefaultHashIterations;
  Bytes digest;

  friend bool operator==(const CredentialRecord&,
                         const CredentialRecord&) = default;
};

/// Fresh salt, digest over `password`.
CredentialRecord make_credential(const TenantId& tenant, const UserId& user,
                                 std::string_view password,
                                 std::int64_t iterations);

/// Constant-time comparison against the stored digest.
bool verify_password(const CredentialRecord& record,
                     std::string_view password);

/// The credential table, kept apart from the policy document.
class CredentialStore {
 public:
  CredentialStore() = default;
  explicit CredentialStore(std::vector<CredentialRecord> records);

  std::optional<CredentialRecord> find(const TenantId& tenant,
                                       const UserId& user) const;
  bool contains(const TenantId& tenant, const UserId& user) const;
  /// Inserts unless a record already exists; returns whether it inserted.
  bool insert(CredentialRecord record);
  std::vector<CredentialRecord> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::map<TenantKey<UserId>, CredentialRecord> records_;
};

struct Session {
  std::string token;
  UserId user;
  TenantId tenant;
  std::set<RoleId> active_roles;
  LocationId location;
  TimePoint issued_at{};
  TimePoint expires_at{};

  bool expired(TimePoint now) const { return now >= expires_at; }

  friend bool operator==(const Session&, const Session&) = default;
};

class SessionRegistry {
 public:
  void insert(const Session& session);
  /// Also returns expired sessions so callers can attribute the failure.
  std::optional<Session> find(std::string_view token) const;
  void purge_expired(TimePoint now);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Session, std::less<>> sessions_;
};

struct PendingRegistration {
  std::string token;
  TenantId tenant;
  UserId user;
  std::string employee_id;
  std::string name;
  std::string designation;
  TimePoint expires_at{};
};

struct AuthnOptions {
  std::int64_t hash_iterations = kDefaultHashIterations;
  std::size_t min_password_length = 8;
  Duration session_ttl = std::chrono::minutes(30);
  Duration pending_ttl = std::chrono::minutes(10);
  // Reject logins from a location that no effective role allows.
  bool enforce_location_at_login = false;
};

/// Registration, password creation and login. Failures against an existing
/// tenant emit exactly one unauthorized-attempt alert.
class Authenticator {
 public:
  Authenticator(const PolicyHandle& policy, CredentialStore& credentials,
                SessionRegistry& sessions, AlertEmitter alerts,
                AuthnOptions options = {}, Clock clock = system_clock());

  /// Directory check. Errors: kUnknownTenant, kDirectoryMismatch,
  /// kAlreadyRegistered.
  PendingRegistration register_user(const TenantId& tenant,
                                    const std::string& name,
                                    const std::string& designation,
                                    const std::string& employee_id);

  /// Consumes the pending registration. Errors: kWeakPassword,
  /// kPendingExpired, kAlreadyRegistered.
  CredentialRecord set_password(std::string_view registration_token,
                                std::string_view password);

  /// Errors: kBadCredentials (uniform for unknown tenant/user and wrong
  /// password), kAccountNotActivated, kLocationForbidden.
  Session authenticate(const TenantId& tenant, const UserId& user,
                       std::string_view password, const LocationId& location);

  const AuthnOptions& options() const { return options_; }

 private:
  void alert(const TenantId& tenant, std::map<std::string, std::string> actor,
             std::string_view reason, std::string_view endpoint);
  void burn_hash(std::string_view password) const;

  const PolicyHandle& policy_;
  CredentialStore& credentials_;
  SessionRegistry& sessions_;
  AlertEmitter alerts_;
  AuthnOptions options_;
  Clock clock_;

  std::mutex registration_mu_;
  std::map<std::string, PendingRegistration, std::less<>> pending_;
};

}  // namespace trbac
