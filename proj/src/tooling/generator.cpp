#include "trbac/tooling/generator.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <tuple>

#include "trbac/error.hpp"
#include "trbac/policy_model.hpp"

namespace trbac::tooling {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Modulo reduction keeps sequences identical across standard libraries.
  int below(int n) { return n <= 0 ? 0 : static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }
  bool chance(int percent) { return below(100) < percent; }

 private:
  std::mt19937_64 engine_;
};

bool in_range(int v, int hi) { return v >= 0 && v <= hi; }

bool violates_static_sod(const PolicyStore& store, const User& user) {
  std::set<TaskId> reachable;
  for (const RoleId& r : junior_closure(store, user.tenant, user.assigned_roles)) {
    const Role* role = store.find_role(user.tenant, r);
    reachable.insert(role->granted_tasks.begin(), role->granted_tasks.end());
  }
  for (const SodConstraint& c : store.sod_constraints) {
    if (c.mode != SodMode::kStatic) continue;
    int hits = 0;
    for (const TaskId& t : c.conflicting_tasks) hits += reachable.contains(t);
    if (hits >= 2) return true;
  }
  return false;
}

}  // namespace

PolicyStore generate_policy(std::uint64_t seed, const PolicyDims& dims) {
  if (!in_range(dims.users, PolicyDims::kMaxUsers) ||
      !in_range(dims.roles, PolicyDims::kMaxRoles) ||
      !in_range(dims.tasks, PolicyDims::kMaxTasks) ||
      !in_range(dims.locations, PolicyDims::kMaxLocations) ||
      !in_range(dims.sod_constraints, PolicyDims::kMaxSod)) {
    throw Error(ErrorCode::kDimsOutOfRange,
                "policy dimensions exceed oracle bounds (users<=5, roles<=4, "
                "tasks<=6, locations<=3, sod<=2)");
  }
  Rng rng(seed);
  PolicyStore store;
  store.operations = {"configure", "read", "write"};
  const std::vector<std::string> ops(store.operations.begin(), store.operations.end());
  const int objects = 3;

  Tenant tenant;
  tenant.id = kSimTenant;
  tenant.name = "Simulated Tenant";
  for (int i = 0; i < dims.users; ++i) {
    tenant.directory.push_back({"E" + std::to_string(i), "Employee " + std::to_string(i),
                                i == 0 ? "manager" : "staff"});
  }
  if (dims.users > 0) tenant.admins.insert(UserId("u0"));
  store.tenants.emplace(tenant.id, tenant);

  std::vector<LocationId> locations;
  for (int i = 0; i < dims.locations; ++i) {
    locations.emplace_back("L" + std::to_string(i));
    store.locations.insert({kSimTenant, locations.back()});
  }

  std::vector<TaskId> task_ids;
  std::map<ProcessId, std::vector<TaskId>> by_process;
  for (int i = 0; i < dims.tasks; ++i) {
    TaskDef t;
    t.id = TaskId("T" + std::to_string(i));
    t.tenant = kSimTenant;
    t.usage_limit = 1 + rng.below(4);
    int nperms = 1 + rng.below(3);
    for (int k = 0; k < nperms; ++k) {
      t.permissions.insert({ops[rng.below(static_cast<int>(ops.size()))],
                            ObjectId("o" + std::to_string(rng.below(objects)))});
    }
    int p = rng.below(10);
    if (p < 4) {
      t.process = ProcessId("P0");
    } else if (p < 7) {
      t.process = ProcessId("P1");
    }
    if (t.process) by_process[*t.process].push_back(t.id);
    task_ids.push_back(t.id);
    store.tasks.emplace(TenantKey<TaskId>{kSimTenant, t.id}, std::move(t));
  }

  // Lower index = more senior, so edges never form a cycle.
  std::vector<RoleId> role_ids;
  for (int i = 0; i < dims.roles; ++i) role_ids.emplace_back("R" + std::to_string(i));
  for (int i = 0; i < dims.roles; ++i) {
    Role r;
    r.id = role_ids[i];
    r.tenant = kSimTenant;
    for (int j = i + 1; j < dims.roles; ++j) {
      if (rng.chance(45)) r.juniors.insert(role_ids[j]);
    }
    if (!locations.empty() && rng.chance(35)) {
      for (const LocationId& l : locations) {
        if (rng.chance(50)) r.allowed_locations.insert(l);
      }
      if (r.allowed_locations.empty()) {
        r.allowed_locations.insert(locations[rng.below(static_cast<int>(locations.size()))]);
      }
    }
    for (const TaskId& t : task_ids) {
      if (rng.chance(35)) r.granted_tasks.insert(t);
    }
    store.roles.emplace(TenantKey<RoleId>{kSimTenant, r.id}, std::move(r));
  }

  std::vector<ProcessId> processes;
  for (const auto& [p, tasks] : by_process) {
    if (tasks.size() >= 2) processes.push_back(p);
  }
  for (int i = 0; i < dims.sod_constraints && !processes.empty(); ++i) {
    const ProcessId& p = processes[rng.below(static_cast<int>(processes.size()))];
    const std::vector<TaskId>& pool = by_process[p];
    SodConstraint c;
    c.tenant = kSimTenant;
    c.process = p;
    c.mode = rng.chance(50) ? SodMode::kStatic : SodMode::kDynamic;
    while (c.conflicting_tasks.size() < 2) {
      c.conflicting_tasks.insert(pool[rng.below(static_cast<int>(pool.size()))]);
    }
    if (pool.size() > 2 && rng.chance(30)) {
      c.conflicting_tasks.insert(pool[rng.below(static_cast<int>(pool.size()))]);
    }
    if (std::find(store.sod_constraints.begin(), store.sod_constraints.end(), c) ==
        store.sod_constraints.end()) {
      store.sod_constraints.push_back(std::move(c));
    }
  }

  // Canonical order, as the persistence layer writes it.
  std::sort(store.sod_constraints.begin(), store.sod_constraints.end(),
            [](const SodConstraint& a, const SodConstraint& b) {
              return std::tie(a.tenant, a.process, a.conflicting_tasks, a.mode) <
                     std::tie(b.tenant, b.process, b.conflicting_tasks, b.mode);
            });

  for (int i = 0; i < dims.users; ++i) {
    User u;
    u.id = UserId("u" + std::to_string(i));
    u.tenant = kSimTenant;
    u.employee_id = "E" + std::to_string(i);
    // Reject-and-retry assignments that would break static SoD.
    for (int attempt = 0; attempt < 64 && !role_ids.empty(); ++attempt) {
      u.assigned_roles.clear();
      int n = 1 + rng.below(2);
      for (int k = 0; k < n; ++k) {
        u.assigned_roles.insert(role_ids[rng.below(static_cast<int>(role_ids.size()))]);
      }
      if (!violates_static_sod(store, u)) break;
      u.assigned_roles.clear();
    }
    store.users.emplace(TenantKey<UserId>{kSimTenant, u.id}, std::move(u));
  }

  return store;
}

}  // namespace trbac::tooling
