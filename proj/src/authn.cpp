#include "trbac/authn.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <stdexcept>

#include "trbac/error.hpp"
#include "trbac/policy_model.hpp"

namespace trbac {

Bytes random_bytes(std::size_t n) {
  Bytes out(n);
  if (RAND_bytes(out.data(), static_cast<int>(n)) != 1) {
    throw std::runtime_error("RAND_bytes failed");
  }
  return out;
}

std::string random_token() { return to_hex(random_bytes(32)); }

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) {
    throw Error(ErrorCode::kParseError, "odd-length hex string");
  }
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::kParseError, "invalid hex digit");
    }
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

Bytes derive_key(std::string_view password, std::span<const std::uint8_t> salt,
                 std::int64_t iterations, std::size_t length) {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  Bytes out(length);
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                        salt.data(), static_cast<int>(salt.size()),
                        static_cast<int>(iterations), EVP_sha256(),
                        static_cast<int>(length), out.data()) != 1) {
    throw std::runtime_error("PKCS5_PBKDF2_HMAC failed");
  }
  return out;
}

CredentialRecord make_credential(const TenantId& tenant, const UserId& user,
                                 std::string_view password,
                                 std::int64_t iterations) {
  CredentialRecord record;
  record.tenant = tenant;
  record.user = user;
  record.salt = random_bytes(kSaltBytes);
  record.iterations = iterations;
  record.digest = derive_key(password, record.salt, iterations);
  return record;
}

bool verify_password(const CredentialRecord& record,
                     std::string_view password) {
  if (record.algorithm_tag != kPbkdf2Sha256Tag || record.digest.empty()) {
    return false;
  }
  Bytes candidate = derive_key(password, record.salt, record.iterations,
                               record.digest.size());
  return CRYPTO_memcmp(candidate.data(), record.digest.data(),
                       candidate.size()) == 0;
}

CredentialStore::CredentialStore(std::vector<CredentialRecord> records) {
  for (auto& r : records) {
    TenantKey<UserId> key{r.tenant, r.user};
    records_.emplace(std::move(key), std::move(r));
  }
}

std::optional<CredentialRecord> CredentialStore::find(
    const TenantId& tenant, const UserId& user) const {
  std::lock_guard lock(mu_);
  auto it = records_.find({tenant, user});
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

bool CredentialStore::contains(const TenantId& tenant,
                               const UserId& user) const {
  std::lock_guard lock(mu_);
  return records_.contains({tenant, user});
}

bool CredentialStore::insert(CredentialRecord record) {
  std::lock_guard lock(mu_);
  TenantKey<UserId> key{record.tenant, record.user};
  return records_.emplace(std::move(key), std::move(record)).second;
}

std::vector<CredentialRecord> CredentialStore::snapshot() const {
  std::lock_guard lock(mu_);
  std::vector<CredentialRecord> out;
  out.reserve(records_.size());
  for (const auto& [_, r] : records_) out.push_back(r);
  return out;
}

void SessionRegistry::insert(const Session& session) {
  std::lock_guard lock(mu_);
  sessions_[session.token] = session;
}

std::optional<Session> SessionRegistry::find(std::string_view token) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

void SessionRegistry::purge_expired(TimePoint now) {
  std::lock_guard lock(mu_);
  std::erase_if(sessions_, [&](const auto& kv) { return kv.second.expired(now); });
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

Authenticator::Authenticator(const PolicyHandle& policy,
                             CredentialStore& credentials,
                             SessionRegistry& sessions, AlertEmitter alerts,
                             AuthnOptions options, Clock clock)
    : policy_(policy),
      credentials_(credentials),
      sessions_(sessions),
      alerts_(std::move(alerts)),
      options_(options),
      clock_(std::move(clock)) {}

void Authenticator::alert(const TenantId& tenant,
                          std::map<std::string, std::string> actor,
                          std::string_view reason, std::string_view endpoint) {
  if (!alerts_) return;
  AlertRecord record;
  record.tenant = tenant;
  record.kind = AlertKind::kUnauthorizedAttempt;
  record.actor = std::move(actor);
  record.reason = std::string(reason);
  record.endpoint = std::string(endpoint);
  record.timestamp = clock_();
  alerts_(record);
}

// Keeps the unknown-user path as slow as the wrong-password path.
void Authenticator::burn_hash(std::string_view password) const {
  static const Bytes kDummySalt(kSaltBytes, 0x5a);
  (void)derive_key(password, kDummySalt, options_.hash_iterations);
}

PendingRegistration Authenticator::register_user(
    const TenantId& tenant, const std::string& name,
    const std::string& designation, const std::string& employee_id) {
  auto store = policy_.get();
  const Tenant* t = store->find_tenant(tenant);
  if (t == nullptr) {
    throw Error(ErrorCode::kUnknownTenant, "unknown tenant");
  }
  std::map<std::string, std::string> actor{{"name", name},
                                           {"designation", designation},
                                           {"employee_id", employee_id}};

  bool listed = std::any_of(
      t->directory.begin(), t->directory.end(), [&](const DirectoryEntry& e) {
        return e.employee_id == employee_id && e.name == name;
      });
  const User* user = nullptr;
  if (listed) {
    for (const auto& [key, u] : store->users) {
      if (key.first == tenant && u.employee_id == employee_id) {
        user = &u;
        break;
      }
    }
  }
  if (user == nullptr) {
    alert(tenant, std::move(actor), to_string(ErrorCode::kDirectoryMismatch),
          endpoint::kRegister);
    throw Error(ErrorCode::kDirectoryMismatch, "directory mismatch");
  }

  std::lock_guard lock(registration_mu_);
  if (credentials_.contains(tenant, user->id)) {
    actor["user"] = user->id.str();
    alert(tenant, std::move(actor), to_string(ErrorCode::kAlreadyRegistered),
          endpoint::kRegister);
    throw Error(ErrorCode::kAlreadyRegistered, "already registered");
  }
  PendingRegistration pending;
  pending.token = random_token();
  pending.tenant = tenant;
  pending.user = user->id;
  pending.employee_id = employee_id;
  pending.name = name;
  pending.designation = designation;
  pending.expires_at = clock_() + options_.pending_ttl;
  pending_[pending.token] = pending;
  return pending;
}

CredentialRecord Authenticator::set_password(
    std::string_view registration_token, std::string_view password) {
  std::unique_lock lock(registration_mu_);
  auto it = pending_.find(registration_token);
  if (it == pending_.end()) {
    throw Error(ErrorCode::kPendingExpired, "no such pending registration");
  }
  const TimePoint now = clock_();
  if (now >= it->second.expires_at) {
    PendingRegistration expired = std::move(it->second);
    pending_.erase(it);
    lock.unlock();
    alert(expired.tenant,
          {{"user", expired.user.str()}, {"employee_id", expired.employee_id}},
          to_string(ErrorCode::kPendingExpired), endpoint::kPassword);
    throw Error(ErrorCode::kPendingExpired, "pending registration expired");
  }
  if (password.size() < options_.min_password_length) {
    // The pending registration stays usable for a second attempt.
    throw Error(ErrorCode::kWeakPassword,
                "password shorter than " +
                    std::to_string(options_.min_password_length));
  }
  PendingRegistration pending = std::move(it->second);
  pending_.erase(it);
  if (credentials_.contains(pending.tenant, pending.user)) {
    lock.unlock();
    alert(pending.tenant,
          {{"user", pending.user.str()}, {"employee_id", pending.employee_id}},
          to_string(ErrorCode::kAlreadyRegistered), endpoint::kPassword);
    throw Error(ErrorCode::kAlreadyRegistered, "already registered");
  }
  CredentialRecord record = make_credential(pending.tenant, pending.user,
                                            password, options_.hash_iterations);
  credentials_.insert(record);
  return record;
}

Session Authenticator::authenticate(const TenantId& tenant, const UserId& user,
                                    std::string_view password,
                                    const LocationId& location) {
  auto store = policy_.get();
  auto reject = [&](ErrorCode code, std::string_view reason) -> Session {
    if (store->find_tenant(tenant) != nullptr) {
      alert(tenant, {{"user", user.str()}, {"location", location.str()}},
            reason, endpoint::kLogin);
    }
    throw Error(code);
  };

  const User* u = store->find_user(tenant, user);
  if (u == nullptr) {
    burn_hash(password);
    return reject(ErrorCode::kBadCredentials,
                  to_string(ErrorCode::kBadCredentials));
  }
  std::optional<CredentialRecord> record = credentials_.find(tenant, user);
  if (!record) {
    burn_hash(password);
    return reject(ErrorCode::kAccountNotActivated,
                  to_string(ErrorCode::kAccountNotActivated));
  }
  if (!verify_password(*record, password)) {
    return reject(ErrorCode::kBadCredentials,
                  to_string(ErrorCode::kBadCredentials));
  }

  std::set<RoleId> roles = resolve_effective_roles(*store, tenant, user);
  if (options_.enforce_location_at_login) {
    bool allowed = std::any_of(roles.begin(), roles.end(), [&](const RoleId& r) {
      const Role* role = store->find_role(tenant, r);
      return role != nullptr && (role->allowed_locations.empty() ||
                                 role->allowed_locations.contains(location));
    });
    if (!allowed) {
      return reject(ErrorCode::kLocationForbidden,
                    to_string(ErrorCode::kLocationForbidden));
    }
  }

  Session session;
  session.token = random_token();
  session.user = user;
  session.tenant = tenant;
  session.active_roles = std::move(roles);
  session.location = location;
  session.issued_at = clock_();
  session.expires_at = session.issued_at + options_.session_ttl;
  sessions_.insert(session);
  return session;
}

}  // namespace trbac
