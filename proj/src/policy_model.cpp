#include "trbac/policy_model.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>

#include "trbac/error.hpp"

namespace trbac {

std::set<RoleId> junior_closure(const PolicyStore& store,
                                const TenantId& tenant,
                                const std::set<RoleId>& roles) {
  std::set<RoleId> seen = roles;
  std::deque<RoleId> frontier(roles.begin(), roles.end());
  while (!frontier.empty()) {
    RoleId current = std::move(frontier.front());
    frontier.pop_front();
    const Role* role = store.find_role(tenant, current);
    if (role == nullptr) continue;
    for (const RoleId& junior : role->juniors) {
      if (seen.insert(junior).second) frontier.push_back(junior);
    }
  }
  return seen;
}

std::set<RoleId> resolve_effective_roles(const PolicyStore& store,
                                         const TenantId& tenant,
                                         const UserId& user) {
  const User* u = store.find_user(tenant, user);
  if (u == nullptr) {
    throw Error(ErrorCode::kUnknownUser, "unknown user " + user.str());
  }
  return junior_closure(store, tenant, u->assigned_roles);
}

std::set<TaskId> permitted_tasks(const PolicyStore& store,
                                 const TenantId& tenant,
                                 const std::set<RoleId>& roles) {
  std::set<TaskId> tasks;
  for (const RoleId& r : roles) {
    const Role* role = store.find_role(tenant, r);
    if (role == nullptr) {
      throw Error(ErrorCode::kUnknownRole, "unknown role " + r.str());
    }
    tasks.insert(role->granted_tasks.begin(), role->granted_tasks.end());
  }
  return tasks;
}

std::set<Permission> reachable_permissions(const PolicyStore& store,
                                           const TenantId& tenant,
                                           const UserId& user) {
  std::set<Permission> perms;
  for (const TaskId& t : permitted_tasks(
           store, tenant, resolve_effective_roles(store, tenant, user))) {
    if (const TaskDef* task = store.find_task(tenant, t)) {
      perms.insert(task->permissions.begin(), task->permissions.end());
    }
  }
  return perms;
}

bool is_strict_senior(const PolicyStore& store, const TenantId& tenant,
                      const RoleId& senior, const RoleId& junior) {
  const Role* role = store.find_role(tenant, senior);
  if (role == nullptr) return false;
  std::set<RoleId> below = junior_closure(store, tenant, role->juniors);
  return below.contains(junior);
}

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::kInvalidIdentifier: return "invalid-identifier";
    case DiagnosticKind::kDanglingReference: return "dangling-reference";
    case DiagnosticKind::kDuplicateEntry: return "duplicate-entry";
    case DiagnosticKind::kHierarchyCycle: return "hierarchy-cycle";
    case DiagnosticKind::kStaticSodViolation: return "static-sod-violation";
    case DiagnosticKind::kInvalidUsageLimit: return "invalid-usage-limit";
    case DiagnosticKind::kEmptyTaskPermissions:
      return "empty-task-permissions";
    case DiagnosticKind::kUnknownOperation: return "unknown-operation";
    case DiagnosticKind::kInvalidSodConstraint:
      return "invalid-sod-constraint";
    case DiagnosticKind::kDirectoryMismatch: return "directory-mismatch";
  }
  return "unknown";
}

namespace {

class Validator {
 public:
  explicit Validator(const PolicyStore& store) : store_(store) {}

  std::vector<Diagnostic> run() {
    check_tenants();
    check_locations();
    check_roles();
    check_tasks();
    check_users();
    check_sod_constraints();
    check_cycles();
    check_static_sod();
    return std::move(out_);
  }

 private:
  void emit(DiagnosticKind kind, const TenantId& tenant,
            std::vector<std::string> subjects, std::string message) {
    out_.push_back(
        {kind, tenant, std::move(subjects), std::move(message)});
  }

  void check_id(const TenantId& tenant, const std::string& id,
                std::string_view what) {
    if (!is_valid_identifier(id)) {
      emit(DiagnosticKind::kInvalidIdentifier, tenant, {id},
           std::string(what) + " identifier '" + id + "' is invalid");
    }
  }

  void dangling(const TenantId& tenant, const std::string& from,
                std::string_view kind, const std::string& to) {
    emit(DiagnosticKind::kDanglingReference, tenant, {from, to},
         from + " references unknown " + std::string(kind) + " '" + to +
             "'");
  }

  bool check_owner(const TenantId& key, const TenantId& field,
                   const std::string& what) {
    if (key != field) {
      dangling(key, what, "tenant", field.str());
      return false;
    }
    if (store_.find_tenant(key) == nullptr) {
      dangling(key, what, "tenant", key.str());
      return false;
    }
    return true;
  }

  void check_tenants() {
    for (const auto& [id, tenant] : store_.tenants) {
      check_id(id, id.str(), "tenant");
      if (tenant.id != id) dangling(id, "tenant " + id.str(), "tenant", tenant.id.str());
      std::set<std::string> seen;
      for (const DirectoryEntry& entry : tenant.directory) {
        if (entry.employee_id.empty()) {
          emit(DiagnosticKind::kInvalidIdentifier, id, {},
               "directory entry '" + entry.name + "' has empty employee id");
        } else if (!seen.insert(entry.employee_id).second) {
          emit(DiagnosticKind::kDuplicateEntry, id, {entry.employee_id},
               "employee id '" + entry.employee_id +
                   "' appears twice in directory");
        }
      }
      for (const UserId& admin : tenant.admins) {
        if (store_.find_user(id, admin) == nullptr) {
          dangling(id, "tenant " + id.str(), "admin user", admin.str());
        }
      }
    }
  }

  void check_locations() {
    for (const auto& [tenant, loc] : store_.locations) {
      check_id(tenant, loc.str(), "location");
      if (store_.find_tenant(tenant) == nullptr) {
        dangling(tenant, "location " + loc.str(), "tenant", tenant.str());
      }
    }
  }

  void check_roles() {
    for (const auto& [key, role] : store_.roles) {
      const auto& [tenant, id] = key;
      const std::string what = "role " + id.str();
      check_id(tenant, id.str(), "role");
      if (!check_owner(tenant, role.tenant, what)) continue;
      for (const RoleId& j : role.juniors) {
        if (store_.find_role(tenant, j) == nullptr) {
          dangling(tenant, what, "role", j.str());
        }
      }
      for (const LocationId& l : role.allowed_locations) {
        if (!store_.has_location(tenant, l)) {
          dangling(tenant, what, "location", l.str());
        }
      }
      for (const TaskId& t : role.granted_tasks) {
        if (store_.find_task(tenant, t) == nullptr) {
          dangling(tenant, what, "task", t.str());
        }
      }
    }
  }

  void check_tasks() {
    for (const auto& [key, task] : store_.tasks) {
      const auto& [tenant, id] = key;
      const std::string what = "task " + id.str();
      check_id(tenant, id.str(), "task");
      if (!check_owner(tenant, task.tenant, what)) continue;
      if (task.usage_limit < 1) {
        emit(DiagnosticKind::kInvalidUsageLimit, tenant, {id.str()},
             what + " has usage_limit " + std::to_string(task.usage_limit));
      }
      if (task.permissions.empty()) {
        emit(DiagnosticKind::kEmptyTaskPermissions, tenant, {id.str()},
             what + " grants no permissions");
      }
      for (const Permission& p : task.permissions) {
        if (!store_.operations.contains(p.operation)) {
          emit(DiagnosticKind::kUnknownOperation, tenant,
               {id.str(), p.operation},
               what + " uses undeclared operation '" + p.operation + "'");
        }
        check_id(tenant, p.object.str(), "object");
      }
      if (task.process) check_id(tenant, task.process->str(), "process");
    }
  }

  void check_users() {
    std::map<TenantKey<std::string>, UserId> by_employee;
    for (const auto& [key, user] : store_.users) {
      const auto& [tenant, id] = key;
      const std::string what = "user " + id.str();
      check_id(tenant, id.str(), "user");
      if (!check_owner(tenant, user.tenant, what)) continue;
      const Tenant& t = *store_.find_tenant(tenant);
      bool listed = std::any_of(
          t.directory.begin(), t.directory.end(),
          [&](const DirectoryEntry& e) {
            return e.employee_id == user.employee_id;
          });
      if (!listed) {
        emit(DiagnosticKind::kDirectoryMismatch, tenant,
             {id.str(), user.employee_id},
             what + " has employee id '" + user.employee_id +
                 "' not in the tenant directory");
      }
      auto [it, inserted] =
          by_employee.emplace(TenantKey<std::string>{tenant, user.employee_id}, id);
      if (!inserted) {
        emit(DiagnosticKind::kDuplicateEntry, tenant,
             {it->second.str(), id.str()},
             "users " + it->second.str() + " and " + id.str() +
                 " share employee id '" + user.employee_id + "'");
      }
      for (const RoleId& r : user.assigned_roles) {
        if (store_.find_role(tenant, r) == nullptr) {
          dangling(tenant, what, "role", r.str());
        }
      }
    }
  }

  void check_sod_constraints() {
    for (const SodConstraint& c : store_.sod_constraints) {
      const std::string what = "sod constraint on process " + c.process.str();
      if (store_.find_tenant(c.tenant) == nullptr) {
        dangling(c.tenant, what, "tenant", c.tenant.str());
        continue;
      }
      if (c.conflicting_tasks.size() < 2) {
        emit(DiagnosticKind::kInvalidSodConstraint, c.tenant,
             {c.process.str()}, what + " names fewer than two tasks");
      }
      for (const TaskId& t : c.conflicting_tasks) {
        const TaskDef* task = store_.find_task(c.tenant, t);
        if (task == nullptr) {
          dangling(c.tenant, what, "task", t.str());
        } else if (task->process != c.process) {
          emit(DiagnosticKind::kInvalidSodConstraint, c.tenant,
               {c.process.str(), t.str()},
               what + " lists task " + t.str() +
                   " which belongs to a different process");
        }
      }
    }
  }

  // Tarjan's SCC per tenant; every non-trivial component (or self-loop)
  // yields one diagnostic naming all of its roles.
  void check_cycles() {
    std::map<TenantKey<RoleId>, int> index;
    std::map<TenantKey<RoleId>, int> low;
    std::set<TenantKey<RoleId>> on_stack;
    std::vector<TenantKey<RoleId>> stack;
    int counter = 0;

    std::function<void(const TenantKey<RoleId>&)> visit =
        [&](const TenantKey<RoleId>& v) {
          index[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack.insert(v);
          const Role& role = store_.roles.at(v);
          for (const RoleId& j : role.juniors) {
            TenantKey<RoleId> w{v.first, j};
            if (!store_.roles.contains(w)) continue;
            if (!index.contains(w)) {
              visit(w);
              low[v] = std::min(low[v], low[w]);
            } else if (on_stack.contains(w)) {
              low[v] = std::min(low[v], index[w]);
            }
          }
          if (low[v] != index[v]) return;
          std::vector<std::string> members;
          TenantKey<RoleId> w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack.erase(w);
            members.push_back(w.second.str());
          } while (w != v);
          bool self_loop = role.juniors.contains(v.second);
          if (members.size() > 1 || self_loop) {
            std::sort(members.begin(), members.end());
            std::string joined;
            for (const auto& m : members) {
              if (!joined.empty()) joined += ", ";
              joined += m;
            }
            emit(DiagnosticKind::kHierarchyCycle, v.first, members,
                 "role hierarchy cycle through " + joined);
          }
        };

    for (const auto& [key, role] : store_.roles) {
      if (!index.contains(key)) visit(key);
    }
  }

  void check_static_sod() {
    for (const auto& [key, user] : store_.users) {
      const TenantId& tenant = key.first;
      std::set<TaskId> reachable;
      for (const RoleId& r :
           junior_closure(store_, tenant, user.assigned_roles)) {
        if (const Role* role = store_.find_role(tenant, r)) {
          reachable.insert(role->granted_tasks.begin(),
                           role->granted_tasks.end());
        }
      }
      for (const SodConstraint& c : store_.sod_constraints) {
        if (c.tenant != tenant || c.mode != SodMode::kStatic) continue;
        std::vector<std::string> hit;
        for (const TaskId& t : c.conflicting_tasks) {
          if (reachable.contains(t)) hit.push_back(t.str());
        }
        if (hit.size() >= 2) {
          std::vector<std::string> subjects{user.id.str()};
          subjects.insert(subjects.end(), hit.begin(), hit.end());
          std::string tasks;
          for (const auto& h : hit) tasks += (tasks.empty() ? "" : ", ") + h;
          emit(DiagnosticKind::kStaticSodViolation, tenant, subjects,
               "user " + user.id.str() +
                   " reaches conflicting tasks of process " +
                   c.process.str() + ": " + tasks);
        }
      }
    }
  }

  const PolicyStore& store_;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate_policy(const PolicyStore& store) {
  return Validator(store).run();
}

}  // namespace trbac
