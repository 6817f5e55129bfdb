#include "trbac/tooling/oracle.hpp"

#include <algorithm>
#include <array>
#include <string_view>

namespace trbac::oracle {

namespace {

// Highest precedence first.
constexpr std::array<std::string_view, 9> kPrecedence = {
    "session-expired",  "not-holder",   "task-not-active",
    "usage-exhausted",  "location-forbidden", "unknown-user",
    "not-superior",     "sod-violation", "no-role-task-mapping",
};

Verdict verdict_of(const std::set<std::string>& violated) {
  Verdict v;
  v.code = pick_reason(violated);
  v.ok = v.code == "ok";
  return v;
}

}  // namespace

std::string pick_reason(const std::set<std::string>& violated) {
  for (std::string_view r : kPrecedence) {
    if (violated.contains(std::string(r))) return std::string(r);
  }
  return "ok";
}

std::size_t OracleMatrix::entry_count() const {
  return can_activate.size() + location_ok.size() + task_grants.size() +
         superior.size();
}

OracleMatrix build_matrix(const PolicyStore& store, const TenantId& tenant,
                          const std::vector<LocationId>& extra_locations,
                          const std::vector<UserId>& extra_users) {
  OracleMatrix m;
  m.tenant = tenant;

  for (const auto& [key, role] : store.roles) {
    if (key.first == tenant) m.roles.push_back(key.second);
  }
  for (const auto& [key, task] : store.tasks) {
    if (key.first == tenant) {
      m.tasks.push_back(key.second);
      m.usage_limit[key.second] = task.usage_limit;
      for (const Permission& p : task.permissions) m.permissions.push_back(p);
    }
  }
  for (const auto& [t, loc] : store.locations) {
    if (t == tenant) m.locations.push_back(loc);
  }
  for (const LocationId& l : extra_locations) m.locations.push_back(l);
  for (const std::string& op : store.operations) {
    for (const auto& [key, task] : store.tasks) {
      if (key.first != tenant) continue;
      for (const Permission& p : task.permissions) {
        m.permissions.push_back({op, p.object});
      }
    }
  }
  std::sort(m.permissions.begin(), m.permissions.end());
  m.permissions.erase(std::unique(m.permissions.begin(), m.permissions.end()),
                      m.permissions.end());

  const std::size_t n = m.roles.size();
  auto index_of = [&](const RoleId& r) -> std::optional<std::size_t> {
    auto it = std::find(m.roles.begin(), m.roles.end(), r);
    if (it == m.roles.end()) return std::nullopt;
    return static_cast<std::size_t>(it - m.roles.begin());
  };
  m.strictly_above.assign(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a) {
    const Role& role = store.roles.at({tenant, m.roles[a]});
    for (const RoleId& j : role.juniors) {
      if (auto b = index_of(j)) m.strictly_above[a][*b] = true;
    }
  }
  // Floyd-Warshall transitive closure.
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (m.strictly_above[i][k] && m.strictly_above[k][j]) {
          m.strictly_above[i][j] = true;
        }
      }
    }
  }

  for (const auto& [key, user] : store.users) {
    if (key.first != tenant) continue;
    m.users.push_back(key.second);
    std::set<RoleId> eff;
    for (const RoleId& r : user.assigned_roles) {
      eff.insert(r);
      if (auto a = index_of(r)) {
        for (std::size_t b = 0; b < n; ++b) {
          if (m.strictly_above[*a][b]) eff.insert(m.roles[b]);
        }
      }
    }
    m.effective_roles[key.second] = eff;
  }
  std::vector<UserId> all_users = m.users;
  all_users.insert(all_users.end(), extra_users.begin(), extra_users.end());

  auto granted = [&](const RoleId& r, const TaskId& t) {
    const Role& role = store.roles.at({tenant, r});
    return role.granted_tasks.contains(t);
  };

  for (const UserId& u : m.users) {
    const std::set<RoleId>& eff = m.effective_roles[u];
    for (const TaskId& t : m.tasks) {
      bool any = false;
      for (const RoleId& r : eff) any = any || granted(r, t);
      m.can_activate[{u, t}] = any;
      for (const LocationId& l : m.locations) {
        bool ok = true;
        for (const RoleId& r : eff) {
          if (!granted(r, t)) continue;
          const Role& role = store.roles.at({tenant, r});
          if (!role.allowed_locations.empty() &&
              !role.allowed_locations.contains(l)) {
            ok = false;
          }
        }
        m.location_ok[{u, t, l}] = ok;
      }
    }
  }

  for (const TaskId& t : m.tasks) {
    const TaskDef& def = store.tasks.at({tenant, t});
    for (const Permission& p : m.permissions) {
      m.task_grants[{t, p}] = def.permissions.contains(p);
    }
  }

  for (const UserId& actor : m.users) {
    for (const UserId& holder : all_users) {
      for (const UserId& to : all_users) {
        std::optional<RoleId> best;
        auto hit = [&](std::size_t a, const UserId& who) {
          auto it = m.effective_roles.find(who);
          if (it == m.effective_roles.end()) return false;
          for (const RoleId& r : it->second) {
            auto b = index_of(r);
            if (b && m.strictly_above[a][*b]) return true;
          }
          return false;
        };
        for (const RoleId& r : m.effective_roles[actor]) {
          auto a = index_of(r);
          if (!a) continue;
          if (hit(*a, holder) && hit(*a, to)) {
            if (!best || r < *best) best = r;
          }
        }
        m.superior[{actor, holder, to}] = best;
      }
    }
  }

  for (const SodConstraint& c : store.sod_constraints) {
    if (c.tenant != tenant) continue;
    for (const TaskId& a : c.conflicting_tasks) {
      for (const TaskId& b : c.conflicting_tasks) {
        if (a != b) m.conflicts[a].insert(b);
      }
    }
  }
  return m;
}

bool Machine::involved_in_conflict(
    const UserId& user, const TaskId& task,
    const std::optional<ProcessInstanceId>& pi) const {
  if (!pi) return false;
  auto it = m_.conflicts.find(task);
  if (it == m_.conflicts.end()) return false;
  for (const TaskId& other : it->second) {
    if (history_.contains({pi->str(), user.str(), other.str()})) return true;
  }
  return false;
}

Verdict Machine::decide(const Activate& r, TimePoint now) const {
  std::set<std::string> violated;
  if (now >= r.session.expires_at) violated.insert("session-expired");
  if (involved_in_conflict(r.session.user, r.task, r.process_instance)) {
    violated.insert("sod-violation");
  }
  auto it = m_.can_activate.find({r.session.user, r.task});
  if (it == m_.can_activate.end() || !it->second) {
    violated.insert("no-role-task-mapping");
  }
  Verdict v = verdict_of(violated);
  if (v.ok) {
    v.holder = r.session.user;
  }
  return v;
}

Verdict Machine::decide(const Access& r, TimePoint now) const {
  const Instance& inst = instances_.at(r.instance);
  std::set<std::string> violated;
  if (now >= r.session.expires_at) violated.insert("session-expired");
  if (r.session.user != inst.holder) violated.insert("not-holder");
  if (inst.state == State::kCompleted) violated.insert("task-not-active");
  if (inst.state == State::kDeactivated) violated.insert("usage-exhausted");
  auto loc = m_.location_ok.find({r.session.user, inst.task, r.session.location});
  // A session user without any role granting the task has no restriction.
  if (loc != m_.location_ok.end() && !loc->second) {
    violated.insert("location-forbidden");
  }
  if (involved_in_conflict(r.session.user, inst.task, inst.process_instance)) {
    violated.insert("sod-violation");
  }
  auto g = m_.task_grants.find({inst.task, r.permission});
  if (g == m_.task_grants.end() || !g->second) {
    violated.insert("no-role-task-mapping");
  }
  Verdict v = verdict_of(violated);
  v.usage_after = inst.usage + (v.ok ? 1 : 0);
  return v;
}

Verdict Machine::decide(const Complete& r, TimePoint now) const {
  const Instance& inst = instances_.at(r.instance);
  std::set<std::string> violated;
  if (now >= r.session.expires_at) violated.insert("session-expired");
  if (r.session.user != inst.holder) violated.insert("not-holder");
  if (inst.state == State::kCompleted) violated.insert("task-not-active");
  return verdict_of(violated);
}

Verdict Machine::decide(const Delegate& r, TimePoint now) const {
  const Instance& inst = instances_.at(r.instance);
  std::set<std::string> violated;
  if (now >= r.session.expires_at) violated.insert("session-expired");
  if (inst.state != State::kActive) violated.insert("task-not-active");
  const bool known = m_.effective_roles.contains(r.to_user);
  std::optional<RoleId> by;
  if (!known) {
    violated.insert("unknown-user");
  } else {
    auto it = m_.superior.find({r.session.user, inst.holder, r.to_user});
    if (it != m_.superior.end()) by = it->second;
    if (!by) violated.insert("not-superior");
    if (involved_in_conflict(r.to_user, inst.task, inst.process_instance)) {
      violated.insert("sod-violation");
    }
  }
  Verdict v = verdict_of(violated);
  if (v.ok) {
    v.holder = r.to_user;
    v.delegated_by = by;
  }
  return v;
}

Verdict Machine::step(const Activate& r, TimePoint now) {
  Verdict v = decide(r, now);
  if (v.ok) {
    Instance inst;
    inst.task = r.task;
    inst.process_instance = r.process_instance;
    inst.holder = r.session.user;
    inst.limit = m_.usage_limit.at(r.task);
    instances_.push_back(inst);
  }
  return v;
}

Verdict Machine::step(const Access& r, TimePoint now) {
  Verdict v = decide(r, now);
  if (v.ok) {
    Instance& inst = instances_.at(r.instance);
    inst.usage += 1;
    if (inst.usage == inst.limit) inst.state = State::kDeactivated;
    if (inst.process_instance) {
      history_.insert({inst.process_instance->str(), inst.holder.str(), inst.task.str()});
    }
  }
  return v;
}

Verdict Machine::step(const Complete& r, TimePoint now) {
  Verdict v = decide(r, now);
  if (v.ok) {
    Instance& inst = instances_.at(r.instance);
    inst.state = State::kCompleted;
    if (inst.process_instance) {
      history_.insert({inst.process_instance->str(), inst.holder.str(), inst.task.str()});
    }
  }
  return v;
}

Verdict Machine::step(const Delegate& r, TimePoint now) {
  Verdict v = decide(r, now);
  if (v.ok) {
    Instance& inst = instances_.at(r.instance);
    inst.holder = r.to_user;
    inst.delegations += 1;
  }
  return v;
}

}  // namespace trbac::oracle
