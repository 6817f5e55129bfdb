#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "trbac/alert.hpp"
#include "trbac/authn.hpp"
#include "trbac/clock.hpp"
#include "trbac/error.hpp"
#include "trbac/policy.hpp"
#include "trbac/policy_handle.hpp"

namespace trbac {

enum class InstanceState { kActive, kDeactivated, kCompleted };

std::string_view to_string(InstanceState state);
InstanceState instance_state_from_string(std::string_view s);

struct DelegationRecord {
  UserId from;
  UserId to;
  RoleId by;

  friend bool operator==(const DelegationRecord&,
                         const DelegationRecord&) = default;
};

struct TaskInstance {
  InstanceId id;
  TenantId tenant;
  TaskId task;
  std::optional<ProcessInstanceId> process_instance;
  UserId activated_by;
  UserId holder;
  InstanceState state = InstanceState::kActive;
  std::int64_t usage_count = 0;
  // Copied from the task definition at activation.
  std::int64_t usage_limit = 1;
  std::vector<DelegationRecord> delegation_chain;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

enum class Verdict { kPermit, kDeny };

// Declared in tie-break precedence order, lowest first.
enum class Reason {
  kOk,
  kNoRoleTaskMapping,
  kSodViolation,
  kLocationForbidden,
  kUsageExhausted,
  kTaskNotActive,
  kNotHolder,
  kSessionExpired,
};

std::string_view to_string(Verdict v);
std::string_view to_string(Reason r);
Reason reason_from_string(std::string_view s);

struct AccessDecision {
  Verdict verdict = Verdict::kDeny;
  Reason reason = Reason::kNoRoleTaskMapping;
  std::int64_t usage_after = 0;
  std::vector<AlertRecord> alerts_emitted;
};

/// One check_access outcome with the context least-privilege auditing needs.
struct AccessEvent {
  TimePoint timestamp{};
  TenantId tenant;
  UserId user;
  InstanceId instance;
  Permission permission;
  Verdict verdict = Verdict::kDeny;
  Reason reason = Reason::kNoRoleTaskMapping;
};

/// A (user, task) involvement within one process instance: the user either
/// exercised the task or completed it.
struct SodHistoryEntry {
  TenantId tenant;
  ProcessInstanceId process_instance;
  UserId user;
  TaskId task;

  friend auto operator<=>(const SodHistoryEntry&,
                          const SodHistoryEntry&) = default;
  friend bool operator==(const SodHistoryEntry&,
                         const SodHistoryEntry&) = default;
};

/// Runtime task-instance engine: activation, usage accounting, location and
/// separation-of-duty checks, delegation and completion.
///
/// Every denial emits exactly one alert; denials never mutate instance or
/// history state. Instance mutations are serialized per instance.
class Engine {
 public:
  Engine(const PolicyHandle& policy, AlertEmitter alerts,
         Clock clock = system_clock());

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Errors: kSessionExpired, kSodViolation, kNoRoleTaskMapping.
  TaskInstance activate_task(
      const Session& session, const TaskId& task,
      const std::optional<ProcessInstanceId>& process_instance = std::nullopt);

  /// Throws kUnknownInstance only for ids this engine never issued (or that
  /// belong to another tenant); every other failure is a deny decision.
  AccessDecision check_access(const Session& session,
                              const InstanceId& instance,
                              const Permission& perm);

  /// Errors: kSessionExpired, kNotHolder, kTaskNotActive, kUnknownInstance.
  TaskInstance complete_task(const Session& session,
                             const InstanceId& instance);

  /// Errors: kSessionExpired, kTaskNotActive, kUnknownUser, kNotSuperior,
  /// kSodViolation, kUnknownInstance.
  TaskInstance delegate_task(const Session& actor, const InstanceId& instance,
                             const UserId& to_user);

  std::optional<TaskInstance> find_instance(const InstanceId& id) const;
  std::vector<TaskInstance> instances() const;
  std::vector<SodHistoryEntry> sod_history() const;
  std::vector<AccessEvent> access_log() const;

  /// Replaces all runtime state, e.g. after loading it from disk.
  void restore(std::vector<TaskInstance> instances,
               std::vector<SodHistoryEntry> history);

 private:
  struct Slot {
    std::mutex mu;
    TaskInstance instance;
  };

  std::shared_ptr<Slot> slot_for(const InstanceId& id,
                                 const TenantId& tenant) const;
  // Caller holds history_mu_.
  bool sod_conflict(const PolicyStore& store, const TenantId& tenant,
                    const UserId& user, const TaskId& task,
                    const std::optional<ProcessInstanceId>& pi) const;
  AlertRecord raise(const Session& session, std::string_view reason,
                    std::string_view endpoint,
                    std::map<std::string, std::string> extra = {});

  const PolicyHandle& policy_;
  AlertEmitter alerts_;
  Clock clock_;

  mutable std::mutex table_mu_;
  std::map<InstanceId, std::shared_ptr<Slot>> slots_;

  mutable std::mutex history_mu_;
  std::set<SodHistoryEntry> history_;

  mutable std::mutex log_mu_;
  std::vector<AccessEvent> access_log_;
};

ErrorCode to_error_code(Reason reason);

struct LeastPrivilegeReport {
  // Reachable but unexercised permissions per user; every user appears.
  std::map<TenantKey<UserId>, std::set<Permission>> unused;

  friend bool operator==(const LeastPrivilegeReport&,
                         const LeastPrivilegeReport&) = default;
};

/// Revocation candidates: reachable permissions minus those exercised by a
/// permitted access within [now - window, now].
LeastPrivilegeReport audit_least_privilege(const PolicyStore& store,
                                           std::span<const AccessEvent> log,
                                           Duration window, TimePoint now);

}  // namespace trbac
