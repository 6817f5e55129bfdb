#pragma once

// Brute-force access-matrix oracle. It restates the access rules from
// scratch over the plain policy data and shares no code with the engine;
// the build links it against trbac_types only.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "trbac/clock.hpp"
#include "trbac/policy.hpp"

namespace trbac::oracle {

/// Every static rule outcome for one tenant, expanded exhaustively over the
/// user, task, permission and location universes.
struct OracleMatrix {
  TenantId tenant;
  std::vector<UserId> users;
  std::vector<RoleId> roles;
  std::vector<TaskId> tasks;
  std::vector<LocationId> locations;
  std::vector<Permission> permissions;

  // strictly_above[a][b]: role a reaches role b through >= 1 juniors edges.
  std::vector<std::vector<bool>> strictly_above;
  std::map<UserId, std::set<RoleId>> effective_roles;

  std::map<std::pair<UserId, TaskId>, bool> can_activate;
  std::map<std::tuple<UserId, TaskId, LocationId>, bool> location_ok;
  std::map<std::pair<TaskId, Permission>, bool> task_grants;
  // (actor, holder, delegate) -> the lowest-id actor role senior to both.
  std::map<std::tuple<UserId, UserId, UserId>, std::optional<RoleId>> superior;
  std::map<TaskId, std::int64_t> usage_limit;
  // For each task, the sets of other tasks it conflicts with.
  std::map<TaskId, std::set<TaskId>> conflicts;

  std::size_t entry_count() const;
};

/// `extra_locations`/`extra_users` widen the universes with ids absent from
/// the policy so the matrix also covers requests naming them.
OracleMatrix build_matrix(const PolicyStore& store, const TenantId& tenant,
                          const std::vector<LocationId>& extra_locations = {},
                          const std::vector<UserId>& extra_users = {});

enum class State { kActive, kDeactivated, kCompleted };

struct Instance {
  TaskId task;
  std::optional<ProcessInstanceId> process_instance;
  UserId holder;
  State state = State::kActive;
  std::int64_t usage = 0;
  std::int64_t limit = 1;
  std::size_t delegations = 0;
};

struct SessionView {
  UserId user;
  LocationId location;
  TimePoint expires_at{};
};

struct Activate {
  SessionView session;
  TaskId task;
  std::optional<ProcessInstanceId> process_instance;
};
struct Access {
  SessionView session;
  std::size_t instance;
  Permission permission;
};
struct Complete {
  SessionView session;
  std::size_t instance;
};
struct Delegate {
  SessionView session;
  std::size_t instance;
  UserId to_user;
};

/// Outcome codes use the engine's wire strings ("ok", "usage-exhausted", ...).
struct Verdict {
  bool ok = false;
  std::string code;
  std::int64_t usage_after = 0;
  std::optional<UserId> holder;
  std::optional<RoleId> delegated_by;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Runtime state layered on the matrix: instances and involvement history.
class Machine {
 public:
  explicit Machine(OracleMatrix matrix) : m_(std::move(matrix)) {}

  Verdict decide(const Activate& r, TimePoint now) const;
  Verdict decide(const Access& r, TimePoint now) const;
  Verdict decide(const Complete& r, TimePoint now) const;
  Verdict decide(const Delegate& r, TimePoint now) const;

  Verdict step(const Activate& r, TimePoint now);
  Verdict step(const Access& r, TimePoint now);
  Verdict step(const Complete& r, TimePoint now);
  Verdict step(const Delegate& r, TimePoint now);

  const std::vector<Instance>& instances() const { return instances_; }
  const OracleMatrix& matrix() const { return m_; }
  /// (process instance, user, task) triples a user exercised or completed.
  const std::set<std::tuple<std::string, std::string, std::string>>& history()
      const {
    return history_;
  }

 private:
  bool involved_in_conflict(const UserId& user, const TaskId& task,
                            const std::optional<ProcessInstanceId>& pi) const;

  OracleMatrix m_;
  std::vector<Instance> instances_;
  std::set<std::tuple<std::string, std::string, std::string>> history_;
};

/// Picks the highest-precedence violated rule, or "ok" when none is.
std::string pick_reason(const std::set<std::string>& violated);

}  // namespace trbac::oracle
