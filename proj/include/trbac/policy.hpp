#pragma once

// Plain data types of the multi-tenant policy. No decision logic lives here,
// so the test oracle can depend on this header alone.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "trbac/ids.hpp"

namespace trbac {

struct AlertSinkDescriptor {
  enum class Kind { kLog, kMail };
  Kind kind = Kind::kLog;
  std::string address;  // mail recipient, unused for kLog

  friend bool operator==(const AlertSinkDescriptor&,
                         const AlertSinkDescriptor&) = default;
};

struct DirectoryEntry {
  std::string employee_id;
  std::string name;
  std::string designation;

  friend bool operator==(const DirectoryEntry&,
                         const DirectoryEntry&) = default;
};

struct Tenant {
  TenantId id;
  std::string name;
  std::vector<DirectoryEntry> directory;
  AlertSinkDescriptor alert_sink;
  // Users allowed to read the tenant's alert log.
  std::set<UserId> admins;

  friend bool operator==(const Tenant&, const Tenant&) = default;
};

struct Role {
  RoleId id;
  TenantId tenant;
  std::set<RoleId> juniors;
  std::set<LocationId> allowed_locations;  // empty = unrestricted
  std::set<TaskId> granted_tasks;

  friend bool operator==(const Role&, const Role&) = default;
};

struct Permission {
  std::string operation;
  ObjectId object;

  friend auto operator<=>(const Permission&, const Permission&) = default;
  friend bool operator==(const Permission&, const Permission&) = default;
};

inline std::string to_string(const Permission& p) {
  return p.operation + ":" + p.object.str();
}

struct TaskDef {
  TaskId id;
  TenantId tenant;
  std::int64_t usage_limit = 1;
  std::set<Permission> permissions;
  std::optional<ProcessId> process;

  friend bool operator==(const TaskDef&, const TaskDef&) = default;
};

enum class SodMode { kStatic, kDynamic };

struct SodConstraint {
  TenantId tenant;
  ProcessId process;
  std::set<TaskId> conflicting_tasks;
  SodMode mode = SodMode::kDynamic;

  friend bool operator==(const SodConstraint&, const SodConstraint&) = default;
};

struct User {
  UserId id;
  TenantId tenant;
  std::string employee_id;
  std::set<RoleId> assigned_roles;

  friend bool operator==(const User&, const User&) = default;
};

template <class Key>
using TenantKey = std::pair<TenantId, Key>;

struct PolicyStore {
  std::set<std::string> operations;
  std::map<TenantId, Tenant> tenants;
  std::map<TenantKey<UserId>, User> users;
  std::map<TenantKey<RoleId>, Role> roles;
  std::map<TenantKey<TaskId>, TaskDef> tasks;
  std::set<TenantKey<LocationId>> locations;
  std::vector<SodConstraint> sod_constraints;

  friend bool operator==(const PolicyStore&, const PolicyStore&) = default;

  const Tenant* find_tenant(const TenantId& t) const {
    auto it = tenants.find(t);
    return it == tenants.end() ? nullptr : &it->second;
  }
  const User* find_user(const TenantId& t, const UserId& u) const {
    auto it = users.find({t, u});
    return it == users.end() ? nullptr : &it->second;
  }
  const Role* find_role(const TenantId& t, const RoleId& r) const {
    auto it = roles.find({t, r});
    return it == roles.end() ? nullptr : &it->second;
  }
  const TaskDef* find_task(const TenantId& t, const TaskId& k) const {
    auto it = tasks.find({t, k});
    return it == tasks.end() ? nullptr : &it->second;
  }
  bool has_location(const TenantId& t, const LocationId& l) const {
    return locations.contains({t, l});
  }
};

}  // namespace trbac
