#include "trbac/tooling/differential.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "trbac/authz.hpp"
#include "trbac/error.hpp"
#include "trbac/policy_handle.hpp"
#include "trbac/policy_model.hpp"
#include "trbac/tooling/oracle.hpp"

namespace trbac::tooling {

namespace {

const LocationId kUnlistedLocation{"Lx"};
const UserId kGhostUser{"ghost"};
const TaskId kGhostTask{"Tghost"};
const std::vector<ProcessInstanceId> kProcessInstances{ProcessInstanceId("pi0"),
                                                       ProcessInstanceId("pi1")};
constexpr std::size_t kRecentInstances = 8;

std::string kind_name(SimOp::Kind k) {
  switch (k) {
    case SimOp::Kind::kLogin: return "login";
    case SimOp::Kind::kActivate: return "activate";
    case SimOp::Kind::kAccess: return "access";
    case SimOp::Kind::kComplete: return "complete";
    case SimOp::Kind::kDelegate: return "delegate";
    case SimOp::Kind::kAdvance: return "advance";
  }
  return "?";
}

std::size_t pick(int raw, std::size_t n) {
  return static_cast<std::size_t>(raw < 0 ? 0 : raw) % n;
}

// Everything needed to run one sequence through both state machines.
class Replayer {
 public:
  Replayer(const PolicyStore& policy, const DifferentialOptions& options)
      : options_(options),
        policy_(policy),
        engine_policy_(options.engine_policy_mutator
                           ? options.engine_policy_mutator(policy)
                           : policy),
        engine_(engine_policy_,
                [this](const AlertRecord&) { ++alerts_; },
                clock_.as_clock()),
        oracle_(oracle::build_matrix(policy, kSimTenant, {kUnlistedLocation},
                                     {kGhostUser})) {
    for (const auto& [key, u] : policy.users) {
      if (key.first == kSimTenant) users_.push_back(key.second);
    }
    delegate_targets_ = users_;
    delegate_targets_.push_back(kGhostUser);
    for (const auto& [t, l] : policy.locations) {
      if (t == kSimTenant) locations_.push_back(l);
    }
    locations_.push_back(kUnlistedLocation);
    std::set<ObjectId> objects;
    for (const auto& [key, task] : policy.tasks) {
      if (key.first != kSimTenant) continue;
      tasks_.push_back(key.second);
      for (const Permission& p : task.permissions) objects.insert(p.object);
    }
    tasks_.push_back(kGhostTask);
    objects.insert(ObjectId("o9"));
    for (const std::string& op : policy.operations) {
      for (const ObjectId& o : objects) perms_.push_back({op, o});
    }
    report_.oracle_matrix_entries = oracle_.matrix().entry_count();
  }

  DivergenceReport run(const std::vector<SimOp>& ops) {
    report_.steps = ops.size();
    for (std::size_t i = 0; i < ops.size(); ++i) step(i, ops[i]);
    finish();
    return std::move(report_);
  }

 private:
  struct SimSession {
    Session engine;
    oracle::SessionView oracle;
  };
  struct Aligned {
    InstanceId engine;
    std::size_t oracle;
  };

  void diverge(std::size_t i, const SimOp& op, std::string engine,
               std::string oracle) {
    report_.divergences.push_back({i, describe(op), std::move(engine), std::move(oracle)});
  }

  static std::string outcome(bool ok, const std::string& code) {
    return ok ? "ok" : code;
  }

  // Resolves the acting session: a < 0 asks for the latest live session of the
  // instance holder, as the oracle sees it. Otherwise a live session is
  // preferred; one pick in ten may land on an expired one.
  const SimSession& session_for(int a, const std::optional<std::size_t>& inst) {
    const TimePoint now = clock_.now();
    if (a < 0 && inst) {
      const UserId& holder = oracle_.instances().at(aligned_[*inst].oracle).holder;
      for (auto it = sessions_.rbegin(); it != sessions_.rend(); ++it) {
        if (it->engine.user == holder && it->engine.expires_at > now) return *it;
      }
    }
    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < sessions_.size(); ++k) {
      if (sessions_[k].engine.expires_at > now) live.push_back(k);
    }
    if (live.empty() || pick(a, 10) == 0) return sessions_[pick(a, sessions_.size())];
    return sessions_[live[pick(a, live.size())]];
  }

  std::size_t instance_for(int b) const {
    std::size_t window = std::min(aligned_.size(), kRecentInstances);
    return aligned_.size() - 1 - pick(b, window);
  }

  void check_alerts(std::size_t i, const SimOp& op, std::size_t before,
                    bool denied) {
    std::size_t expected = denied ? 1 : 0;
    if (alerts_ - before != expected) {
      diverge(i, op, "alerts=" + std::to_string(alerts_ - before),
              "alerts=" + std::to_string(expected));
    }
  }

  void tally(const SimOp& op, bool ok, const std::string& code) {
    ok ? ++report_.permits : ++report_.denies;
    ++report_.outcomes[kind_name(op.kind) + ":" + code];
  }

  void step(std::size_t i, const SimOp& op) {
    const TimePoint now = clock_.now();
    const std::size_t alerts_before = alerts_;
    switch (op.kind) {
      case SimOp::Kind::kAdvance:
        clock_.advance(std::chrono::minutes(std::max(1, op.a)));
        return;

      case SimOp::Kind::kLogin: {
        if (users_.empty()) return;
        const UserId& user = users_[pick(op.a, users_.size())];
        const LocationId& loc = locations_[pick(op.b, locations_.size())];
        SimSession s;
        s.engine.token = "sim-" + std::to_string(sessions_.size());
        s.engine.user = user;
        s.engine.tenant = kSimTenant;
        s.engine.active_roles = resolve_effective_roles(*engine_policy_.get(), kSimTenant, user);
        s.engine.location = loc;
        s.engine.issued_at = now;
        s.engine.expires_at = now + options_.session_ttl;
        s.oracle = {user, loc, s.engine.expires_at};
        sessions_.push_back(std::move(s));
        return;
      }

      case SimOp::Kind::kActivate: {
        if (sessions_.empty()) return;
        const SimSession& s = session_for(op.a, std::nullopt);
        const TaskId& task = tasks_[pick(op.b, tasks_.size())];
        std::optional<ProcessInstanceId> pi;
        if (op.c >= 0) pi = kProcessInstances[pick(op.c, kProcessInstances.size())];

        bool eng_ok = true;
        std::string eng_code = "ok";
        InstanceId id;
        try {
          id = engine_.activate_task(s.engine, task, pi).id;
        } catch (const Error& e) {
          eng_ok = false;
          eng_code = std::string(to_string(e.code()));
        }
        oracle::Verdict ov = oracle_.step(oracle::Activate{s.oracle, task, pi}, now);
        if (eng_ok != ov.ok || eng_code != ov.code) {
          diverge(i, op, outcome(eng_ok, eng_code), outcome(ov.ok, ov.code));
        }
        if (eng_ok && ov.ok) {
          aligned_.push_back({id, oracle_.instances().size() - 1});
          ++report_.activations;
        }
        tally(op, eng_ok, eng_code);
        check_alerts(i, op, alerts_before, !eng_ok);
        return;
      }

      case SimOp::Kind::kAccess: {
        if (sessions_.empty() || aligned_.empty()) return;
        const std::size_t k = instance_for(op.b);
        const SimSession& s = session_for(op.a, k);
        const oracle::Instance& oi = oracle_.instances().at(aligned_[k].oracle);
        Permission perm;
        if (op.c < 0) {
          const TaskDef* def = policy_.find_task(kSimTenant, oi.task);
          std::vector<Permission> own(def->permissions.begin(), def->permissions.end());
          perm = own[pick(-op.c - 1, own.size())];
        } else {
          perm = perms_[pick(op.c, perms_.size())];
        }
        AccessDecision d = engine_.check_access(s.engine, aligned_[k].engine, perm);
        oracle::Verdict ov =
            oracle_.step(oracle::Access{s.oracle, aligned_[k].oracle, perm}, now);
        const bool eng_ok = d.verdict == Verdict::kPermit;
        const std::string eng_code(to_string(d.reason));
        if (eng_ok != ov.ok || eng_code != ov.code || d.usage_after != ov.usage_after) {
          diverge(i, op,
                  eng_code + " usage=" + std::to_string(d.usage_after),
                  ov.code + " usage=" + std::to_string(ov.usage_after));
        }
        tally(op, eng_ok, eng_code);
        check_alerts(i, op, alerts_before, !eng_ok);
        return;
      }

      case SimOp::Kind::kComplete: {
        if (sessions_.empty() || aligned_.empty()) return;
        const std::size_t k = instance_for(op.b);
        const SimSession& s = session_for(op.a, k);
        bool eng_ok = true;
        std::string eng_code = "ok";
        try {
          engine_.complete_task(s.engine, aligned_[k].engine);
        } catch (const Error& e) {
          eng_ok = false;
          eng_code = std::string(to_string(e.code()));
        }
        oracle::Verdict ov =
            oracle_.step(oracle::Complete{s.oracle, aligned_[k].oracle}, now);
        if (eng_ok != ov.ok || eng_code != ov.code) {
          diverge(i, op, outcome(eng_ok, eng_code), outcome(ov.ok, ov.code));
        }
        if (eng_ok) ++report_.completions;
        tally(op, eng_ok, eng_code);
        check_alerts(i, op, alerts_before, !eng_ok);
        return;
      }

      case SimOp::Kind::kDelegate: {
        if (sessions_.empty() || aligned_.empty()) return;
        const std::size_t k = instance_for(op.b);
        const SimSession& s = session_for(op.a, std::nullopt);
        const UserId& to = delegate_targets_[pick(op.c, delegate_targets_.size())];
        const std::int64_t usage_before =
            engine_.find_instance(aligned_[k].engine)->usage_count;
        bool eng_ok = true;
        std::string eng_code = "ok";
        TaskInstance after;
        try {
          after = engine_.delegate_task(s.engine, aligned_[k].engine, to);
        } catch (const Error& e) {
          eng_ok = false;
          eng_code = std::string(to_string(e.code()));
        }
        oracle::Verdict ov =
            oracle_.step(oracle::Delegate{s.oracle, aligned_[k].oracle, to}, now);
        if (eng_ok != ov.ok || eng_code != ov.code) {
          diverge(i, op, outcome(eng_ok, eng_code), outcome(ov.ok, ov.code));
        } else if (eng_ok) {
          const DelegationRecord& last = after.delegation_chain.back();
          if (after.holder != *ov.holder || last.by != *ov.delegated_by ||
              after.usage_count != usage_before) {
            diverge(i, op, "holder=" + after.holder.str() + " by=" + last.by.str(),
                    "holder=" + ov.holder->str() + " by=" + ov.delegated_by->str());
          }
        }
        if (eng_ok) ++report_.delegations;
        tally(op, eng_ok, eng_code);
        check_alerts(i, op, alerts_before, !eng_ok);
        return;
      }
    }
  }

  void finish() {
    report_.alerts = alerts_;
    std::map<InstanceId, TaskInstance> by_id;
    for (const TaskInstance& inst : engine_.instances()) {
      if (inst.usage_count > inst.usage_limit || inst.usage_count < 0) {
        ++report_.usage_bound_violations;
      }
      by_id.emplace(inst.id, inst);
    }
    // Exercised (process instance, user) -> tasks, from the engine's own log.
    std::map<std::pair<ProcessInstanceId, UserId>, std::set<TaskId>> exercised;
    for (const AccessEvent& e : engine_.access_log()) {
      if (e.verdict != Verdict::kPermit) continue;
      const TaskInstance& inst = by_id.at(e.instance);
      if (!inst.process_instance) continue;
      exercised[{*inst.process_instance, e.user}].insert(inst.task);
    }
    for (const auto& [key, tasks] : exercised) {
      for (const SodConstraint& c : policy_.sod_constraints) {
        int hits = 0;
        for (const TaskId& t : c.conflicting_tasks) hits += tasks.contains(t);
        if (hits >= 2) ++report_.sod_safety_violations;
      }
    }
  }

  const DifferentialOptions& options_;
  const PolicyStore& policy_;
  ManualClock clock_;
  PolicyHandle engine_policy_;
  std::size_t alerts_ = 0;
  Engine engine_;
  oracle::Machine oracle_;

  std::vector<UserId> users_;
  std::vector<UserId> delegate_targets_;
  std::vector<LocationId> locations_;
  std::vector<TaskId> tasks_;
  std::vector<Permission> perms_;
  std::vector<SimSession> sessions_;
  std::vector<Aligned> aligned_;
  DivergenceReport report_;
};

bool diverges(const PolicyStore& policy, const std::vector<SimOp>& ops,
              const DifferentialOptions& options) {
  return !Replayer(policy, options).run(ops).divergences.empty();
}

}  // namespace

std::string describe(const SimOp& op) {
  return kind_name(op.kind) + "(" + std::to_string(op.a) + "," +
         std::to_string(op.b) + "," + std::to_string(op.c) + ")";
}

std::vector<SimOp> generate_ops(std::uint64_t seed, std::size_t steps) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto below = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  std::vector<SimOp> ops;
  ops.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    SimOp op;
    int roll = below(100);
    if (roll < 10) {
      op = {SimOp::Kind::kLogin, below(100), below(100), 0};
    } else if (roll < 32) {
      op = {SimOp::Kind::kActivate, below(100), below(100), below(3) - 1};
    } else if (roll < 72) {
      op = {SimOp::Kind::kAccess, below(100) < 75 ? -1 : below(100), below(100),
            below(100) < 70 ? -1 - below(3) : below(100)};
    } else if (roll < 80) {
      op = {SimOp::Kind::kComplete, below(100) < 70 ? -1 : below(100), below(100), 0};
    } else if (roll < 94) {
      op = {SimOp::Kind::kDelegate, below(100), below(100), below(100)};
    } else {
      op = {SimOp::Kind::kAdvance, 1 + below(10), 0, 0};
    }
    ops.push_back(op);
  }
  return ops;
}

DivergenceReport replay(const PolicyStore& policy, const std::vector<SimOp>& ops,
                        const DifferentialOptions& options) {
  DivergenceReport report = Replayer(policy, options).run(ops);
  if (options.shrink && !report.divergences.empty()) {
    report.minimal_failing = shrink(policy, ops, options);
  }
  return report;
}

std::vector<SimOp> shrink(const PolicyStore& policy, std::vector<SimOp> ops,
                          const DifferentialOptions& options) {
  DivergenceReport first = Replayer(policy, options).run(ops);
  if (first.divergences.empty()) return {};
  ops.resize(first.divergences.front().step + 1);

  for (std::size_t chunk = std::max<std::size_t>(ops.size() / 2, 1);; chunk /= 2) {
    std::size_t i = 0;
    while (i < ops.size()) {
      std::vector<SimOp> candidate;
      candidate.reserve(ops.size());
      candidate.insert(candidate.end(), ops.begin(), ops.begin() + static_cast<std::ptrdiff_t>(i));
      std::size_t end = std::min(ops.size(), i + chunk);
      candidate.insert(candidate.end(), ops.begin() + static_cast<std::ptrdiff_t>(end), ops.end());
      if (!candidate.empty() && diverges(policy, candidate, options)) {
        ops = std::move(candidate);
      } else {
        i = end;
      }
    }
    if (chunk == 1) break;
  }
  return ops;
}

DivergenceReport run_differential(std::uint64_t seed, std::size_t steps,
                                  const DifferentialOptions& options) {
  PolicyStore policy = generate_policy(seed, options.dims);
  DivergenceReport report = replay(policy, generate_ops(seed, steps), options);
  report.seed = seed;
  return report;
}

nlohmann::json to_json(const DivergenceReport& r) {
  nlohmann::json divergences = nlohmann::json::array();
  for (const Divergence& d : r.divergences) {
    divergences.push_back(
        {{"step", d.step}, {"op", d.op}, {"engine", d.engine}, {"oracle", d.oracle}});
  }
  nlohmann::json minimal = nlohmann::json::array();
  for (const SimOp& op : r.minimal_failing) minimal.push_back(describe(op));
  return {{"seed", r.seed},
          {"steps", r.steps},
          {"divergence_count", r.divergences.size()},
          {"divergences", divergences},
          {"minimal_failing_sequence", minimal},
          {"permits", r.permits},
          {"denies", r.denies},
          {"alerts", r.alerts},
          {"activations", r.activations},
          {"delegations", r.delegations},
          {"completions", r.completions},
          {"sod_safety_violations", r.sod_safety_violations},
          {"usage_bound_violations", r.usage_bound_violations},
          {"oracle_matrix_entries", r.oracle_matrix_entries},
          {"outcomes", r.outcomes}};
}

}  // namespace trbac::tooling
