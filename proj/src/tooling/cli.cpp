#include "trbac/tooling/cli.hpp"

#include <functional>
#include <optional>

#include "CLI11.hpp"
#include "trbac/authz.hpp"
#include "trbac/error.hpp"
#include "trbac/gateway.hpp"
#include "trbac/persistence.hpp"
#include "trbac/policy_model.hpp"
#include "trbac/tooling/differential.hpp"

namespace trbac::tooling {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PolicyStore read_unvalidated(const std::string& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
  return policy_from_json(doc);
}

void print_diagnostics(const std::vector<Diagnostic>& diags, std::ostream& os) {
  for (const Diagnostic& d : diags) {
    os << to_string(d.kind) << ": " << d.message << "\n";
  }
}

// Validates the edited store and writes it back atomically.
int commit(const PolicyStore& store, const std::string& path, std::ostream& out,
           std::ostream& err) {
  std::vector<Diagnostic> diags = validate_policy(store);
  if (!diags.empty()) {
    print_diagnostics(diags, err);
    err << "policy not saved\n";
    return kExitDomain;
  }
  save_policy(store, path);
  out << "OK\n";
  return kExitOk;
}

Permission parse_permission(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw UsageError("permission must be operation:object, got '" + text + "'");
  }
  return {text.substr(0, colon), ObjectId(text.substr(colon + 1))};
}

Tenant& require_tenant(PolicyStore& store, const std::string& id) {
  auto it = store.tenants.find(TenantId(id));
  if (it == store.tenants.end()) {
    throw Error(ErrorCode::kUnknownTenant, "unknown tenant '" + id + "'");
  }
  return it->second;
}

Role& require_role(PolicyStore& store, const std::string& tenant,
                   const std::string& role) {
  require_tenant(store, tenant);
  auto it = store.roles.find({TenantId(tenant), RoleId(role)});
  if (it == store.roles.end()) {
    throw Error(ErrorCode::kUnknownRole, "unknown role '" + role + "'");
  }
  return it->second;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"Multi-tenant T-RBAC policy administration", "trbac-gate"};
  app.require_subcommand(1);
  std::function<int()> action;

  std::string file, tenant, role, task, name, process, mode = "dynamic";
  std::vector<std::string> juniors, locations, tasks, perms, roles, admins;

  // policy
  CLI::App* policy = app.add_subcommand("policy", "Inspect and edit policy files");
  policy->require_subcommand(1);

  CLI::App* validate = policy->add_subcommand("validate", "Check a policy file");
  validate->add_option("file", file, "Policy file")->required();
  validate->callback([&] {
    action = [&] {
      std::vector<Diagnostic> diags = validate_policy(read_unvalidated(file));
      if (!diags.empty()) {
        print_diagnostics(diags, out);
        return kExitDomain;
      }
      out << "OK\n";
      return kExitOk;
    };
  });

  CLI::App* show = policy->add_subcommand("show", "Print a policy in canonical form");
  show->add_option("file", file, "Policy file")->required();
  show->callback([&] {
    action = [&] {
      out << canonical_dump(policy_to_json(read_unvalidated(file)));
      return kExitOk;
    };
  });

  CLI::App* add_role = policy->add_subcommand("add-role", "Add a role");
  add_role->add_option("file", file)->required();
  add_role->add_option("--tenant", tenant)->required();
  add_role->add_option("--role", role)->required();
  add_role->add_option("--junior", juniors);
  add_role->add_option("--location", locations, "Allowed location (repeatable)");
  add_role->callback([&] {
    action = [&] {
      PolicyStore store = read_unvalidated(file);
      require_tenant(store, tenant);
      Role r;
      r.id = RoleId(role);
      r.tenant = TenantId(tenant);
      for (const auto& j : juniors) r.juniors.insert(RoleId(j));
      for (const auto& l : locations) {
        r.allowed_locations.insert(LocationId(l));
        store.locations.insert({r.tenant, LocationId(l)});
      }
      if (!store.roles.emplace(TenantKey<RoleId>{r.tenant, r.id}, r).second) {
        err << "role '" << role << "' already exists\n";
        return kExitDomain;
      }
      return commit(store, file, out, err);
    };
  });

  CLI::App* grant = policy->add_subcommand("grant-task", "Grant a task to a role");
  grant->add_option("file", file)->required();
  grant->add_option("--tenant", tenant)->required();
  grant->add_option("--role", role)->required();
  grant->add_option("--task", task)->required();
  grant->callback([&] {
    action = [&] {
      PolicyStore store = read_unvalidated(file);
      require_role(store, tenant, role).granted_tasks.insert(TaskId(task));
      return commit(store, file, out, err);
    };
  });

  std::string senior, junior;
  bool remove = false;
  CLI::App* hierarchy =
      policy->add_subcommand("set-hierarchy", "Add or remove a seniority edge");
  hierarchy->add_option("file", file)->required();
  hierarchy->add_option("--tenant", tenant)->required();
  hierarchy->add_option("--senior", senior)->required();
  hierarchy->add_option("--junior", junior)->required();
  hierarchy->add_flag("--remove", remove);
  hierarchy->callback([&] {
    action = [&] {
      PolicyStore store = read_unvalidated(file);
      Role& r = require_role(store, tenant, senior);
      if (remove) {
        r.juniors.erase(RoleId(junior));
      } else {
        r.juniors.insert(RoleId(junior));
      }
      return commit(store, file, out, err);
    };
  });

  CLI::App* add_sod = policy->add_subcommand("add-sod", "Add a separation-of-duty constraint");
  add_sod->add_option("file", file)->required();
  add_sod->add_option("--tenant", tenant)->required();
  add_sod->add_option("--process", process)->required();
  add_sod->add_option("--tasks", tasks, "Conflicting tasks")->required()->delimiter(',');
  add_sod->add_option("--mode", mode)->check(CLI::IsMember({"static", "dynamic"}));
  add_sod->callback([&] {
    action = [&] {
      PolicyStore store = read_unvalidated(file);
      require_tenant(store, tenant);
      SodConstraint c;
      c.tenant = TenantId(tenant);
      c.process = ProcessId(process);
      c.mode = mode == "static" ? SodMode::kStatic : SodMode::kDynamic;
      for (const auto& t : tasks) c.conflicting_tasks.insert(TaskId(t));
      store.sod_constraints.push_back(c);
      return commit(store, file, out, err);
    };
  });

  std::int64_t limit = 1;
  CLI::App* add_task = policy->add_subcommand("add-task", "Add a task definition");
  add_task->add_option("file", file)->required();
  add_task->add_option("--tenant", tenant)->required();
  add_task->add_option("--task", task)->required();
  add_task->add_option("--limit", limit, "Usage limit")->check(CLI::PositiveNumber);
  add_task->add_option("--permission", perms, "operation:object (repeatable)")->required();
  add_task->add_option("--process", process);
  add_task->callback([&] {
    action = [&] {
      PolicyStore store = read_unvalidated(file);
      require_tenant(store, tenant);
      TaskDef t;
      t.id = TaskId(task);
      t.tenant = TenantId(tenant);
      t.usage_limit = limit;
      for (const auto& p : perms) {
        Permission perm = parse_permission(p);
        store.operations.insert(perm.operation);
        t.permissions.insert(perm);
      }
      if (!process.empty()) t.process = ProcessId(process);
      if (!store.tasks.emplace(TenantKey<TaskId>{t.tenant, t.id}, t).second) {
        err << "task '" << task << "' already exists\n";
        return kExitDomain;
      }
      return commit(store, file, out, err);
    };
  });

  std::string user, employee;
  CLI::App* add_user = policy->add_subcommand("add-user", "Add a user bound to a directory entry");
  add_user->add_option("file", file)->required();
  add_user->add_option("--tenant", tenant)->required();
  add_user->add_option("--user", user)->required();
  add_user->add_option("--employee", employee)->required();
  add_user->add_option("--role", roles);
  add_user->callback([&] {
    action = [&] {
      PolicyStore store = read_unvalidated(file);
      require_tenant(store, tenant);
      User u;
      u.id = UserId(user);
      u.tenant = TenantId(tenant);
      u.employee_id = employee;
      for (const auto& r : roles) u.assigned_roles.insert(RoleId(r));
      if (!store.users.emplace(TenantKey<UserId>{u.tenant, u.id}, u).second) {
        err << "user '" << user << "' already exists\n";
        return kExitDomain;
      }
      return commit(store, file, out, err);
    };
  });

  // tenant
  CLI::App* tenant_cmd = app.add_subcommand("tenant", "Manage tenants");
  tenant_cmd->require_subcommand(1);

  std::string sink = "log", address;
  CLI::App* tenant_add = tenant_cmd->add_subcommand("add", "Add a tenant");
  tenant_add->add_option("file", file)->required();
  tenant_add->add_option("--tenant", tenant)->required();
  tenant_add->add_option("--name", name)->required();
  tenant_add->add_option("--sink", sink)->check(CLI::IsMember({"log", "mail"}));
  tenant_add->add_option("--address", address, "Mail recipient");
  tenant_add->add_option("--admin", admins);
  tenant_add->callback([&] {
    action = [&] {
      PolicyStore store = read_unvalidated(file);
      Tenant t;
      t.id = TenantId(tenant);
      t.name = name;
      t.alert_sink.kind = sink == "mail" ? AlertSinkDescriptor::Kind::kMail
                                         : AlertSinkDescriptor::Kind::kLog;
      t.alert_sink.address = address;
      for (const auto& a : admins) t.admins.insert(UserId(a));
      if (!store.tenants.emplace(t.id, t).second) {
        err << "tenant '" << tenant << "' already exists\n";
        return kExitDomain;
      }
      return commit(store, file, out, err);
    };
  });

  std::string designation;
  CLI::App* directory = tenant_cmd->add_subcommand("directory", "Employee directory");
  directory->require_subcommand(1);
  CLI::App* dir_add = directory->add_subcommand("add", "Add a directory entry");
  dir_add->add_option("file", file)->required();
  dir_add->add_option("--tenant", tenant)->required();
  dir_add->add_option("--employee", employee)->required();
  dir_add->add_option("--name", name)->required();
  dir_add->add_option("--designation", designation);
  dir_add->callback([&] {
    action = [&] {
      PolicyStore store = read_unvalidated(file);
      require_tenant(store, tenant).directory.push_back({employee, name, designation});
      return commit(store, file, out, err);
    };
  });

  // serve
  std::string config;
  CLI::App* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  serve->add_option("--config", config, "Gateway config file")->required();
  serve->callback([&] {
    action = [&] {
      Gateway gateway(load_gateway_config(config));
      HttpServer server(gateway);
      int port = server.bind(gateway.config().listen_host, gateway.config().listen_port);
      out << "listening on " << gateway.config().listen_host << ":" << port << std::endl;
      server.run();
      return kExitOk;
    };
  });

  // audit
  std::string audit_file;
  std::int64_t window_seconds = 0;
  std::optional<std::int64_t> now_ms;
  CLI::App* audit = app.add_subcommand("audit", "Audit reports");
  audit->require_subcommand(1);
  CLI::App* least = audit->add_subcommand("least-privilege", "List revocation candidates");
  least->add_option("--policy", file)->required();
  least->add_option("--audit", audit_file, "Audit log (JSON lines)")->required();
  least->add_option("--window", window_seconds, "Look-back window in seconds")
      ->required()
      ->check(CLI::NonNegativeNumber);
  least->add_option("--now", now_ms, "Window end, epoch milliseconds");
  least->callback([&] {
    action = [&] {
      PolicyStore store = load_policy(file);
      std::vector<AccessEvent> events = access_events_from_audit(read_audit(audit_file));
      TimePoint now = now_ms ? from_epoch_ms(*now_ms) : std::chrono::system_clock::now();
      LeastPrivilegeReport report = audit_least_privilege(
          store, events, std::chrono::seconds(window_seconds), now);
      Json candidates = Json::array();
      for (const auto& [key, unused] : report.unused) {
        Json list = Json::array();
        for (const Permission& p : unused) list.push_back(to_string(p));
        candidates.push_back(
            {{"tenant", key.first.str()}, {"user", key.second.str()}, {"unused", list}});
      }
      out << Json{{"window_seconds", window_seconds},
                  {"now", to_epoch_ms(now)},
                  {"candidates", candidates}}
                 .dump(2)
          << "\n";
      return kExitOk;
    };
  });

  // simulate
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::size_t seeds = 1;
  CLI::App* simulate = app.add_subcommand("simulate", "Differential run: engine vs oracle");
  simulate->add_option("--seed", seed)->required();
  simulate->add_option("--n", steps, "Operations per sequence")->required();
  simulate->add_option("--seeds", seeds, "Consecutive seeds to run")->check(CLI::PositiveNumber);
  simulate->callback([&] {
    action = [&] {
      Json reports = Json::array();
      std::size_t divergences = 0;
      bool clean = true;
      for (std::size_t i = 0; i < seeds; ++i) {
        DivergenceReport r = run_differential(seed + i, steps);
        divergences += r.divergences.size();
        clean = clean && r.clean();
        reports.push_back(to_json(r));
      }
      Json doc = seeds == 1 ? reports[0]
                            : Json{{"seeds", seeds},
                                   {"divergence_count", divergences},
                                   {"reports", reports}};
      out << doc.dump(2) << "\n";
      return clean ? kExitOk : kExitDomain;
    };
  });

  try {
    std::vector<const char*> argv{"trbac-gate"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    print_diagnostics(e.diagnostics(), err);
    return kExitDomain;
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace trbac::tooling
