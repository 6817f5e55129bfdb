#pragma once

// File-backed storage: policy document, credential table, task-instance
// state, per-tenant alert logs and the access audit log.
//
//   <data_dir>/policy.json
//   <data_dir>/credentials.json
//   <data_dir>/instances.json
//   <data_dir>/audit.log
//   <data_dir>/alerts/<tenant>.log

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trbac/alert.hpp"
#include "trbac/authn.hpp"
#include "trbac/authz.hpp"
#include "trbac/error.hpp"
#include "trbac/policy.hpp"
#include "trbac/policy_model.hpp"

namespace trbac {

using Json = nlohmann::json;

inline constexpr std::int64_t kPolicyFormatVersion = 1;
inline constexpr std::int64_t kStateFormatVersion = 1;

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Policy document. Serialization is canonical: object keys and every
// collection are emitted in sorted order.
Json policy_to_json(const PolicyStore& store);
/// Throws kParseError or kFormatVersion. Does not validate.
PolicyStore policy_from_json(const Json& doc);
std::string canonical_dump(const Json& doc);

/// Returns a store that passes validate_policy. Throws kIoError,
/// kParseError, kFormatVersion or ValidationError.
PolicyStore load_policy(const std::filesystem::path& path);

/// Test seams for the temp-file-then-rename write protocol.
struct WriteHooks {
  std::function<void(const std::filesystem::path& temp)> before_rename;
};

/// Writes `content` to a uniquely named sibling temp file, fsyncs and
/// renames it over `path`. Readers observe either the previous or the new
/// contents in full.
void atomic_write(const std::filesystem::path& path, const std::string& content,
                  const WriteHooks& hooks = {});

void save_policy(const PolicyStore& store, const std::filesystem::path& path,
                 const WriteHooks& hooks = {});

std::string read_file(const std::filesystem::path& path);

// Credential table.
Json credentials_to_json(const std::vector<CredentialRecord>& records);
std::vector<CredentialRecord> credentials_from_json(const Json& doc);
std::vector<CredentialRecord> load_credentials(const std::filesystem::path& path);
void save_credentials(const std::vector<CredentialRecord>& records,
                      const std::filesystem::path& path);

// Task-instance state plus the separation-of-duty history it implies.
struct RuntimeState {
  std::vector<TaskInstance> instances;
  std::vector<SodHistoryEntry> sod_history;
};
Json runtime_state_to_json(const RuntimeState& state);
RuntimeState runtime_state_from_json(const Json& doc);
RuntimeState load_runtime_state(const std::filesystem::path& path);
void save_runtime_state(const RuntimeState& state,
                        const std::filesystem::path& path);

Json to_json(const Session& session);
Json to_json(const TaskInstance& instance);
Json to_json(const AccessDecision& decision);
Json to_json(const AlertRecord& alert);
AlertRecord alert_from_json(const Json& doc);

struct AuditRecord {
  TimePoint timestamp{};
  std::string tenant;
  std::string actor;
  std::string endpoint;
  std::string verdict;  // permit | deny
  std::string reason;
  std::optional<std::string> instance;
  std::optional<Permission> permission;

  friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

Json to_json(const AuditRecord& record);
AuditRecord audit_record_from_json(const Json& doc);

/// Half-open time window [from, to).
struct TimeWindow {
  TimePoint from = TimePoint::min();
  TimePoint to = TimePoint::max();
};

/// Append-only line-delimited JSON log. A single writer per file; the
/// writer clamps timestamps so they never go backwards.
class AuditLog {
 public:
  explicit AuditLog(std::filesystem::path path);

  /// Returns the record as written (with its clamped timestamp).
  AuditRecord append(AuditRecord record);
  std::vector<AuditRecord> read(const TimeWindow& window = {}) const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::optional<TimePoint> last_;
};

/// Reads every complete line; a torn trailing line (no newline) is ignored.
std::vector<AuditRecord> read_audit(const std::filesystem::path& path,
                                    const TimeWindow& window = {});

/// Appends one line and flushes. Throws kIoError.
void append_line(const std::filesystem::path& path, const std::string& line);
/// Complete lines only.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Converts permitted /v1/access audit records into access events.
std::vector<AccessEvent> access_events_from_audit(
    const std::vector<AuditRecord>& records);

}  // namespace trbac
