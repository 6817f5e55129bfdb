#pragma once

#include <atomic>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "trbac/alert.hpp"
#include "trbac/authn.hpp"
#include "trbac/persistence.hpp"
#include "trbac/policy_model.hpp"

namespace trbac::test {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(TRBAC_FIXTURE_DIR) / name;
}

inline PolicyStore sample_policy() {
  return policy_from_json(Json::parse(read_file(fixture("sample.json"))));
}

inline const TenantId kAcme{"acme"};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("trbac-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

class AlertRecorder {
 public:
  AlertEmitter emitter() {
    return [this](const AlertRecord& r) {
      std::lock_guard lock(mu_);
      records_.push_back(r);
    };
  }
  std::vector<AlertRecord> records() const {
    std::lock_guard lock(mu_);
    return records_;
  }
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return records_.size();
  }
  void clear() {
    std::lock_guard lock(mu_);
    records_.clear();
  }

 private:
  mutable std::mutex mu_;
  std::vector<AlertRecord> records_;
};

/// A session as the authenticator would issue it, without hashing a password.
inline Session session_for(const PolicyStore& store, const TenantId& tenant,
                           const UserId& user, const LocationId& location,
                           TimePoint now, Duration ttl = std::chrono::minutes(30)) {
  Session s;
  s.token = random_token();
  s.user = user;
  s.tenant = tenant;
  s.active_roles = resolve_effective_roles(store, tenant, user);
  s.location = location;
  s.issued_at = now;
  s.expires_at = now + ttl;
  return s;
}

}  // namespace trbac::test
