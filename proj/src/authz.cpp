#include "trbac/authz.hpp"

#include <algorithm>

#include "trbac/error.hpp"
#include "trbac/policy_model.hpp"

namespace trbac {

std::string_view to_string(InstanceState state) {
  switch (state) {
    case InstanceState::kActive: return "active";
    case InstanceState::kDeactivated: return "deactivated";
    case InstanceState::kCompleted: return "completed";
  }
  return "unknown";
}

InstanceState instance_state_from_string(std::string_view s) {
  if (s == "active") return InstanceState::kActive;
  if (s == "deactivated") return InstanceState::kDeactivated;
  if (s == "completed") return InstanceState::kCompleted;
  throw Error(ErrorCode::kParseError,
              "unknown instance state '" + std::string(s) + "'");
}

std::string_view to_string(Verdict v) {
  return v == Verdict::kPermit ? "permit" : "deny";
}

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::kOk: return "ok";
    case Reason::kNoRoleTaskMapping: return "no-role-task-mapping";
    case Reason::kSodViolation: return "sod-violation";
    case Reason::kLocationForbidden: return "location-forbidden";
    case Reason::kUsageExhausted: return "usage-exhausted";
    case Reason::kTaskNotActive: return "task-not-active";
    case Reason::kNotHolder: return "not-holder";
    case Reason::kSessionExpired: return "session-expired";
  }
  return "unknown";
}

Reason reason_from_string(std::string_view s) {
  for (Reason r : {Reason::kOk, Reason::kNoRoleTaskMapping,
                   Reason::kSodViolation, Reason::kLocationForbidden,
                   Reason::kUsageExhausted, Reason::kTaskNotActive,
                   Reason::kNotHolder, Reason::kSessionExpired}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::kParseError,
              "unknown reason code '" + std::string(s) + "'");
}

ErrorCode to_error_code(Reason reason) {
  switch (reason) {
    case Reason::kNoRoleTaskMapping: return ErrorCode::kNoRoleTaskMapping;
    case Reason::kSodViolation: return ErrorCode::kSodViolation;
    case Reason::kTaskNotActive: return ErrorCode::kTaskNotActive;
    case Reason::kNotHolder: return ErrorCode::kNotHolder;
    case Reason::kSessionExpired: return ErrorCode::kSessionExpired;
    case Reason::kLocationForbidden: return ErrorCode::kLocationForbidden;
    case Reason::kUsageExhausted:
    case Reason::kOk: break;
  }
  return ErrorCode::kTaskNotActive;
}

Engine::Engine(const PolicyHandle& policy, AlertEmitter alerts, Clock clock)
    : policy_(policy), alerts_(std::move(alerts)), clock_(std::move(clock)) {}

AlertRecord Engine::raise(const Session& session, std::string_view reason,
                          std::string_view endpoint,
                          std::map<std::string, std::string> extra) {
  AlertRecord record;
  record.tenant = session.tenant;
  record.kind = reason == to_string(Reason::kSessionExpired)
                    ? AlertKind::kUnauthorizedAttempt
                    : AlertKind::kMaliciousInsider;
  record.actor = std::move(extra);
  record.actor["user"] = session.user.str();
  record.actor["location"] = session.location.str();
  record.reason = std::string(reason);
  record.endpoint = std::string(endpoint);
  record.timestamp = clock_();
  if (alerts_) alerts_(record);
  return record;
}

std::shared_ptr<Engine::Slot> Engine::slot_for(const InstanceId& id,
                                               const TenantId& tenant) const {
  std::lock_guard lock(table_mu_);
  auto it = slots_.find(id);
  // Instances of other tenants are reported as missing, not as foreign.
  if (it == slots_.end() || it->second->instance.tenant != tenant) {
    throw Error(ErrorCode::kUnknownInstance, "unknown instance " + id.str());
  }
  return it->second;
}

bool Engine::sod_conflict(const PolicyStore& store, const TenantId& tenant,
                          const UserId& user, const TaskId& task,
                          const std::optional<ProcessInstanceId>& pi) const {
  if (!pi) return false;
  for (const SodConstraint& c : store.sod_constraints) {
    if (c.tenant != tenant || !c.conflicting_tasks.contains(task)) continue;
    for (const TaskId& other : c.conflicting_tasks) {
      if (other == task) continue;
      if (history_.contains({tenant, *pi, user, other})) return true;
    }
  }
  return false;
}

TaskInstance Engine::activate_task(
    const Session& session, const TaskId& task,
    const std::optional<ProcessInstanceId>& process_instance) {
  auto store = policy_.get();
  const std::map<std::string, std::string> ctx{{"task", task.str()}};
  if (session.expired(clock_())) {
    raise(session, to_string(Reason::kSessionExpired), endpoint::kActivate, ctx);
    throw Error(ErrorCode::kSessionExpired);
  }

  std::set<TaskId> granted;
  for (const RoleId& r : session.active_roles) {
    if (const Role* role = store->find_role(session.tenant, r)) {
      granted.insert(role->granted_tasks.begin(), role->granted_tasks.end());
    }
  }
  const TaskDef* def = store->find_task(session.tenant, task);

  std::unique_lock history_lock(history_mu_);
  if (sod_conflict(*store, session.tenant, session.user, task,
                   process_instance)) {
    history_lock.unlock();
    raise(session, to_string(Reason::kSodViolation), endpoint::kActivate, ctx);
    throw Error(ErrorCode::kSodViolation);
  }
  history_lock.unlock();
  if (def == nullptr || !granted.contains(task)) {
    raise(session, to_string(Reason::kNoRoleTaskMapping), endpoint::kActivate,
          ctx);
    throw Error(ErrorCode::kNoRoleTaskMapping);
  }

  auto slot = std::make_shared<Slot>();
  TaskInstance& inst = slot->instance;
  inst.id = InstanceId("ti-" + random_token().substr(0, 24));
  inst.tenant = session.tenant;
  inst.task = task;
  inst.process_instance = process_instance;
  inst.activated_by = session.user;
  inst.holder = session.user;
  inst.state = InstanceState::kActive;
  inst.usage_count = 0;
  inst.usage_limit = def->usage_limit;
  TaskInstance copy = inst;
  std::lock_guard lock(table_mu_);
  slots_.emplace(copy.id, std::move(slot));
  return copy;
}

AccessDecision Engine::check_access(const Session& session,
                                    const InstanceId& instance,
                                    const Permission& perm) {
  auto store = policy_.get();
  auto slot = slot_for(instance, session.tenant);
  const TimePoint now = clock_();

  std::lock_guard slot_lock(slot->mu);
  std::unique_lock history_lock(history_mu_);
  TaskInstance& inst = slot->instance;

  Reason reason = Reason::kOk;
  if (session.expired(now)) {
    reason = Reason::kSessionExpired;
  } else if (session.user != inst.holder || session.tenant != inst.tenant) {
    reason = Reason::kNotHolder;
  } else if (inst.state == InstanceState::kCompleted) {
    reason = Reason::kTaskNotActive;
  } else if (inst.state == InstanceState::kDeactivated ||
             inst.usage_count >= inst.usage_limit) {
    reason = Reason::kUsageExhausted;
  } else {
    const TaskDef* def = store->find_task(inst.tenant, inst.task);
    bool location_ok = true;
    for (const RoleId& r : session.active_roles) {
      const Role* role = store->find_role(session.tenant, r);
      if (role == nullptr || !role->granted_tasks.contains(inst.task)) continue;
      if (!role->allowed_locations.empty() &&
          !role->allowed_locations.contains(session.location)) {
        location_ok = false;
        break;
      }
    }
    if (!location_ok) {
      reason = Reason::kLocationForbidden;
    } else if (sod_conflict(*store, inst.tenant, session.user, inst.task,
                            inst.process_instance)) {
      reason = Reason::kSodViolation;
    } else if (def == nullptr || !def->permissions.contains(perm)) {
      reason = Reason::kNoRoleTaskMapping;
    }
  }

  AccessDecision decision;
  decision.reason = reason;
  if (reason == Reason::kOk) {
    decision.verdict = Verdict::kPermit;
    ++inst.usage_count;
    if (inst.usage_count >= inst.usage_limit) {
      inst.state = InstanceState::kDeactivated;
    }
    if (inst.process_instance) {
      history_.insert(
          {inst.tenant, *inst.process_instance, inst.holder, inst.task});
    }
  }
  decision.usage_after = inst.usage_count;
  history_lock.unlock();

  if (decision.verdict == Verdict::kDeny) {
    decision.alerts_emitted.push_back(
        raise(session, to_string(reason), endpoint::kAccess,
              {{"instance", instance.str()},
               {"task", inst.task.str()},
               {"permission", to_string(perm)}}));
  }

  std::lock_guard log_lock(log_mu_);
  access_log_.push_back({now, session.tenant, session.user, instance, perm,
                         decision.verdict, decision.reason});
  return decision;
}

TaskInstance Engine::complete_task(const Session& session,
                                   const InstanceId& instance) {
  auto slot = slot_for(instance, session.tenant);
  std::unique_lock slot_lock(slot->mu);
  TaskInstance& inst = slot->instance;

  Reason reason = Reason::kOk;
  if (session.expired(clock_())) {
    reason = Reason::kSessionExpired;
  } else if (session.user != inst.holder) {
    reason = Reason::kNotHolder;
  } else if (inst.state == InstanceState::kCompleted) {
    reason = Reason::kTaskNotActive;
  }
  if (reason != Reason::kOk) {
    slot_lock.unlock();
    raise(session, to_string(reason), endpoint::kComplete,
          {{"instance", instance.str()}});
    throw Error(to_error_code(reason));
  }

  inst.state = InstanceState::kCompleted;
  if (inst.process_instance) {
    std::lock_guard history_lock(history_mu_);
    history_.insert(
        {inst.tenant, *inst.process_instance, inst.holder, inst.task});
  }
  return inst;
}

TaskInstance Engine::delegate_task(const Session& actor,
                                   const InstanceId& instance,
                                   const UserId& to_user) {
  auto store = policy_.get();
  auto slot = slot_for(instance, actor.tenant);
  std::unique_lock slot_lock(slot->mu);
  TaskInstance& inst = slot->instance;

  auto fail = [&](std::string_view reason, ErrorCode code) -> TaskInstance {
    slot_lock.unlock();
    raise(actor, reason, endpoint::kDelegate,
          {{"instance", instance.str()}, {"to_user", to_user.str()}});
    throw Error(code);
  };

  if (actor.expired(clock_())) {
    return fail(to_string(Reason::kSessionExpired), ErrorCode::kSessionExpired);
  }
  if (inst.state != InstanceState::kActive) {
    return fail(to_string(Reason::kTaskNotActive), ErrorCode::kTaskNotActive);
  }
  if (store->find_user(actor.tenant, to_user) == nullptr) {
    return fail(to_string(ErrorCode::kUnknownUser), ErrorCode::kUnknownUser);
  }

  std::set<RoleId> holder_roles;
  if (store->find_user(inst.tenant, inst.holder) != nullptr) {
    holder_roles = resolve_effective_roles(*store, inst.tenant, inst.holder);
  }
  const std::set<RoleId> delegate_roles =
      resolve_effective_roles(*store, actor.tenant, to_user);

  std::optional<RoleId> by;
  for (const RoleId& senior : actor.active_roles) {
    const Role* role = store->find_role(actor.tenant, senior);
    if (role == nullptr) continue;
    const std::set<RoleId> below =
        junior_closure(*store, actor.tenant, role->juniors);
    auto covers = [&](const std::set<RoleId>& roles) {
      return std::any_of(roles.begin(), roles.end(),
                         [&](const RoleId& r) { return below.contains(r); });
    };
    if (covers(holder_roles) && covers(delegate_roles)) {
      by = senior;
      break;
    }
  }
  if (!by) {
    return fail(to_string(ErrorCode::kNotSuperior), ErrorCode::kNotSuperior);
  }

  bool conflict = false;
  {
    std::lock_guard history_lock(history_mu_);
    conflict = sod_conflict(*store, inst.tenant, to_user, inst.task,
                            inst.process_instance);
  }
  if (conflict) {
    return fail(to_string(Reason::kSodViolation), ErrorCode::kSodViolation);
  }

  inst.delegation_chain.push_back({inst.holder, to_user, *by});
  inst.holder = to_user;
  return inst;
}

std::optional<TaskInstance> Engine::find_instance(const InstanceId& id) const {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(table_mu_);
    auto it = slots_.find(id);
    if (it == slots_.end()) return std::nullopt;
    slot = it->second;
  }
  std::lock_guard lock(slot->mu);
  return slot->instance;
}

std::vector<TaskInstance> Engine::instances() const {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::lock_guard lock(table_mu_);
    for (const auto& [_, s] : slots_) slots.push_back(s);
  }
  std::vector<TaskInstance> out;
  out.reserve(slots.size());
  for (const auto& s : slots) {
    std::lock_guard lock(s->mu);
    out.push_back(s->instance);
  }
  return out;
}

std::vector<SodHistoryEntry> Engine::sod_history() const {
  std::lock_guard lock(history_mu_);
  return {history_.begin(), history_.end()};
}

std::vector<AccessEvent> Engine::access_log() const {
  std::lock_guard lock(log_mu_);
  return access_log_;
}

void Engine::restore(std::vector<TaskInstance> instances,
                     std::vector<SodHistoryEntry> history) {
  std::map<InstanceId, std::shared_ptr<Slot>> slots;
  for (auto& inst : instances) {
    auto slot = std::make_shared<Slot>();
    InstanceId id = inst.id;
    slot->instance = std::move(inst);
    slots.emplace(std::move(id), std::move(slot));
  }
  {
    std::lock_guard lock(table_mu_);
    slots_ = std::move(slots);
  }
  std::lock_guard lock(history_mu_);
  history_ = {history.begin(), history.end()};
}

LeastPrivilegeReport audit_least_privilege(const PolicyStore& store,
                                           std::span<const AccessEvent> log,
                                           Duration window, TimePoint now) {
  std::map<TenantKey<UserId>, std::set<Permission>> exercised;
  const TimePoint from = now - window;
  for (const AccessEvent& e : log) {
    if (e.verdict != Verdict::kPermit) continue;
    if (e.timestamp < from || e.timestamp > now) continue;
    exercised[{e.tenant, e.user}].insert(e.permission);
  }

  LeastPrivilegeReport report;
  for (const auto& [key, user] : store.users) {
    std::set<Permission> unused =
        reachable_permissions(store, key.first, key.second);
    if (auto it = exercised.find(key); it != exercised.end()) {
      for (const Permission& p : it->second) unused.erase(p);
    }
    report.unused.emplace(key, std::move(unused));
  }
  return report;
}

}  // namespace trbac
