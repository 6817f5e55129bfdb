#include "trbac/persistence.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace trbac {

namespace fs = std::filesystem;

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
  std::string out = "policy failed validation:";
  for (const Diagnostic& d : diagnostics) {
    out += "\n  [" + std::string(to_string(d.kind)) + "] " + d.message;
  }
  return out;
}

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorCode::kParseError, what);
}

const Json& field(const Json& obj, const char* name) {
  if (!obj.is_object()) parse_fail("expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) parse_fail(std::string("missing field '") + name + "'");
  return *it;
}

std::string str_field(const Json& obj, const char* name) {
  const Json& v = field(obj, name);
  if (!v.is_string()) parse_fail(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::string opt_str_field(const Json& obj, const char* name,
                          std::string fallback = {}) {
  auto it = obj.find(name);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) parse_fail(std::string("field '") + name + "' must be a string");
  return it->get<std::string>();
}

std::int64_t int_field(const Json& obj, const char* name) {
  const Json& v = field(obj, name);
  if (!v.is_number_integer()) parse_fail(std::string("field '") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

const Json& array_field(const Json& obj, const char* name) {
  static const Json kEmpty = Json::array();
  auto it = obj.find(name);
  if (it == obj.end()) return kEmpty;
  if (!it->is_array()) parse_fail(std::string("field '") + name + "' must be an array");
  return *it;
}

template <class IdT>
std::set<IdT> id_set(const Json& obj, const char* name) {
  std::set<IdT> out;
  for (const Json& v : array_field(obj, name)) {
    if (!v.is_string()) parse_fail(std::string("entries of '") + name + "' must be strings");
    out.emplace(v.get<std::string>());
  }
  return out;
}

template <class IdT>
Json id_array(const std::set<IdT>& ids) {
  Json arr = Json::array();
  for (const IdT& id : ids) arr.push_back(id.str());
  return arr;
}

Json permission_json(const Permission& p) {
  return {{"operation", p.operation}, {"object", p.object.str()}};
}

Permission permission_from(const Json& j) {
  return {str_field(j, "operation"), ObjectId(str_field(j, "object"))};
}

std::string_view sod_mode_str(SodMode m) {
  return m == SodMode::kStatic ? "static" : "dynamic";
}

Json parse_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    parse_fail(origin + ": " + e.what());
  }
}

// Runs `fn`, translating library exceptions into kParseError.
template <class Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    parse_fail(e.what());
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error(ErrorCode::kValidationFailed, summarize(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

Json policy_to_json(const PolicyStore& store) {
  Json doc;
  doc["format_version"] = kPolicyFormatVersion;
  doc["operations"] = store.operations;

  Json tenants = Json::array();
  for (const auto& [id, t] : store.tenants) {
    std::vector<DirectoryEntry> dir = t.directory;
    std::sort(dir.begin(), dir.end(), [](const auto& a, const auto& b) {
      return std::tie(a.employee_id, a.name, a.designation) <
             std::tie(b.employee_id, b.name, b.designation);
    });
    Json directory = Json::array();
    for (const DirectoryEntry& e : dir) {
      directory.push_back({{"employee_id", e.employee_id},
                           {"name", e.name},
                           {"designation", e.designation}});
    }
    Json sink = {{"kind", t.alert_sink.kind == AlertSinkDescriptor::Kind::kMail
                              ? "mail"
                              : "log"}};
    if (!t.alert_sink.address.empty()) sink["address"] = t.alert_sink.address;
    tenants.push_back({{"id", id.str()},
                       {"name", t.name},
                       {"directory", directory},
                       {"alert_sink", sink},
                       {"admins", id_array(t.admins)}});
  }
  doc["tenants"] = tenants;

  Json locations = Json::array();
  for (const auto& [tenant, loc] : store.locations) {
    locations.push_back({{"tenant", tenant.str()}, {"id", loc.str()}});
  }
  doc["locations"] = locations;

  Json roles = Json::array();
  for (const auto& [key, r] : store.roles) {
    roles.push_back({{"id", key.second.str()},
                     {"tenant", key.first.str()},
                     {"juniors", id_array(r.juniors)},
                     {"allowed_locations", id_array(r.allowed_locations)},
                     {"granted_tasks", id_array(r.granted_tasks)}});
  }
  doc["roles"] = roles;

  Json tasks = Json::array();
  for (const auto& [key, t] : store.tasks) {
    Json perms = Json::array();
    for (const Permission& p : t.permissions) perms.push_back(permission_json(p));
    Json task = {{"id", key.second.str()},
                 {"tenant", key.first.str()},
                 {"usage_limit", t.usage_limit},
                 {"permissions", perms}};
    if (t.process) task["process"] = t.process->str();
    tasks.push_back(task);
  }
  doc["tasks"] = tasks;

  Json users = Json::array();
  for (const auto& [key, u] : store.users) {
    users.push_back({{"id", key.second.str()},
                     {"tenant", key.first.str()},
                     {"employee_id", u.employee_id},
                     {"assigned_roles", id_array(u.assigned_roles)}});
  }
  doc["users"] = users;

  std::vector<SodConstraint> sod = store.sod_constraints;
  std::sort(sod.begin(), sod.end(), [](const auto& a, const auto& b) {
    return std::tie(a.tenant, a.process, a.conflicting_tasks, a.mode) <
           std::tie(b.tenant, b.process, b.conflicting_tasks, b.mode);
  });
  Json constraints = Json::array();
  for (const SodConstraint& c : sod) {
    constraints.push_back({{"tenant", c.tenant.str()},
                           {"process", c.process.str()},
                           {"conflicting_tasks", id_array(c.conflicting_tasks)},
                           {"mode", sod_mode_str(c.mode)}});
  }
  doc["sod_constraints"] = constraints;
  return doc;
}

PolicyStore policy_from_json(const Json& doc) {
  return guarded([&] {
    if (!doc.is_object()) parse_fail("policy document must be an object");
    std::int64_t version = int_field(doc, "format_version");
    if (version != kPolicyFormatVersion) {
      throw Error(ErrorCode::kFormatVersion,
                  "unsupported policy format_version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kPolicyFormatVersion) + ")");
    }
    PolicyStore store;
    for (const Json& op : array_field(doc, "operations")) {
      if (!op.is_string()) parse_fail("operations must be strings");
      store.operations.insert(op.get<std::string>());
    }

    for (const Json& j : array_field(doc, "tenants")) {
      Tenant t;
      t.id = TenantId(str_field(j, "id"));
      t.name = opt_str_field(j, "name", t.id.str());
      for (const Json& e : array_field(j, "directory")) {
        t.directory.push_back({str_field(e, "employee_id"),
                               str_field(e, "name"),
                               opt_str_field(e, "designation")});
      }
      std::sort(t.directory.begin(), t.directory.end(),
                [](const auto& a, const auto& b) {
                  return std::tie(a.employee_id, a.name, a.designation) <
                         std::tie(b.employee_id, b.name, b.designation);
                });
      if (auto it = j.find("alert_sink"); it != j.end()) {
        std::string kind = opt_str_field(*it, "kind", "log");
        if (kind == "mail") {
          t.alert_sink.kind = AlertSinkDescriptor::Kind::kMail;
        } else if (kind != "log") {
          parse_fail("unknown alert sink kind '" + kind + "'");
        }
        t.alert_sink.address = opt_str_field(*it, "address");
      }
      t.admins = id_set<UserId>(j, "admins");
      TenantId id = t.id;
      if (!store.tenants.emplace(id, std::move(t)).second) {
        parse_fail("duplicate tenant '" + id.str() + "'");
      }
    }

    for (const Json& j : array_field(doc, "locations")) {
      TenantKey<LocationId> key{TenantId(str_field(j, "tenant")),
                                LocationId(str_field(j, "id"))};
      if (!store.locations.insert(key).second) {
        parse_fail("duplicate location '" + key.second.str() + "'");
      }
    }

    for (const Json& j : array_field(doc, "roles")) {
      Role r;
      r.id = RoleId(str_field(j, "id"));
      r.tenant = TenantId(str_field(j, "tenant"));
      r.juniors = id_set<RoleId>(j, "juniors");
      r.allowed_locations = id_set<LocationId>(j, "allowed_locations");
      r.granted_tasks = id_set<TaskId>(j, "granted_tasks");
      TenantKey<RoleId> key{r.tenant, r.id};
      if (!store.roles.emplace(key, std::move(r)).second) {
        parse_fail("duplicate role '" + key.second.str() + "' in tenant '" +
                   key.first.str() + "'");
      }
    }

    for (const Json& j : array_field(doc, "tasks")) {
      TaskDef t;
      t.id = TaskId(str_field(j, "id"));
      t.tenant = TenantId(str_field(j, "tenant"));
      t.usage_limit = int_field(j, "usage_limit");
      for (const Json& p : array_field(j, "permissions")) {
        t.permissions.insert(permission_from(p));
      }
      if (auto it = j.find("process"); it != j.end() && !it->is_null()) {
        t.process = ProcessId(str_field(j, "process"));
      }
      TenantKey<TaskId> key{t.tenant, t.id};
      if (!store.tasks.emplace(key, std::move(t)).second) {
        parse_fail("duplicate task '" + key.second.str() + "' in tenant '" +
                   key.first.str() + "'");
      }
    }

    for (const Json& j : array_field(doc, "users")) {
      User u;
      u.id = UserId(str_field(j, "id"));
      u.tenant = TenantId(str_field(j, "tenant"));
      u.employee_id = str_field(j, "employee_id");
      u.assigned_roles = id_set<RoleId>(j, "assigned_roles");
      TenantKey<UserId> key{u.tenant, u.id};
      if (!store.users.emplace(key, std::move(u)).second) {
        parse_fail("duplicate user '" + key.second.str() + "' in tenant '" +
                   key.first.str() + "'");
      }
    }

    for (const Json& j : array_field(doc, "sod_constraints")) {
      SodConstraint c;
      c.tenant = TenantId(str_field(j, "tenant"));
      c.process = ProcessId(str_field(j, "process"));
      c.conflicting_tasks = id_set<TaskId>(j, "conflicting_tasks");
      std::string mode = str_field(j, "mode");
      if (mode == "static") {
        c.mode = SodMode::kStatic;
      } else if (mode == "dynamic") {
        c.mode = SodMode::kDynamic;
      } else {
        parse_fail("unknown sod mode '" + mode + "'");
      }
      store.sod_constraints.push_back(std::move(c));
    }
    std::sort(store.sod_constraints.begin(), store.sod_constraints.end(),
              [](const auto& a, const auto& b) {
                return std::tie(a.tenant, a.process, a.conflicting_tasks,
                                a.mode) < std::tie(b.tenant, b.process,
                                                   b.conflicting_tasks, b.mode);
              });
    return store;
  });
}

std::string canonical_dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return buf.str();
}

PolicyStore load_policy(const fs::path& path) {
  PolicyStore store = policy_from_json(parse_text(read_file(path), path.string()));
  std::vector<Diagnostic> diagnostics = validate_policy(store);
  if (!diagnostics.empty()) throw ValidationError(std::move(diagnostics));
  return store;
}

void atomic_write(const fs::path& path, const std::string& content,
                  const WriteHooks& hooks) {
  static std::atomic<std::uint64_t> counter{0};
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  fs::path temp = path;
  temp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(tid) +
          "." + std::to_string(counter++);

  int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0600);
  if (fd < 0) throw Error(ErrorCode::kIoError, "cannot create " + temp.string());
  const char* data = content.data();
  std::size_t left = content.size();
  while (left > 0) {
    ssize_t n = ::write(fd, data, left);
    if (n < 0) {
      ::close(fd);
      ::unlink(temp.c_str());
      throw Error(ErrorCode::kIoError, "write failed on " + temp.string());
    }
    data += n;
    left -= static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);

  // A hook that throws models a crash: the temp file stays behind and the
  // target is untouched.
  if (hooks.before_rename) hooks.before_rename(temp);
  std::error_code ec;
  fs::rename(temp, path, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw Error(ErrorCode::kIoError, "cannot replace " + path.string());
  }
}

void save_policy(const PolicyStore& store, const fs::path& path,
                 const WriteHooks& hooks) {
  atomic_write(path, canonical_dump(policy_to_json(store)), hooks);
}

Json credentials_to_json(const std::vector<CredentialRecord>& records) {
  std::vector<CredentialRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.tenant, a.user) < std::tie(b.tenant, b.user);
  });
  Json arr = Json::array();
  for (const CredentialRecord& r : sorted) {
    arr.push_back({{"tenant", r.tenant.str()},
                   {"user", r.user.str()},
                   {"algorithm_tag", r.algorithm_tag},
                   {"salt", to_hex(r.salt)},
                   {"iterations", r.iterations},
                   {"digest", to_hex(r.digest)}});
  }
  return {{"format_version", kStateFormatVersion}, {"credentials", arr}};
}

std::vector<CredentialRecord> credentials_from_json(const Json& doc) {
  return guarded([&] {
    if (int_field(doc, "format_version") != kStateFormatVersion) {
      throw Error(ErrorCode::kFormatVersion, "unsupported credentials format");
    }
    std::vector<CredentialRecord> out;
    for (const Json& j : array_field(doc, "credentials")) {
      CredentialRecord r;
      r.tenant = TenantId(str_field(j, "tenant"));
      r.user = UserId(str_field(j, "user"));
      r.algorithm_tag = str_field(j, "algorithm_tag");
      r.salt = from_hex(str_field(j, "salt"));
      r.iterations = int_field(j, "iterations");
      r.digest = from_hex(str_field(j, "digest"));
      out.push_back(std::move(r));
    }
    return out;
  });
}

std::vector<CredentialRecord> load_credentials(const fs::path& path) {
  if (!fs::exists(path)) return {};
  return credentials_from_json(parse_text(read_file(path), path.string()));
}

void save_credentials(const std::vector<CredentialRecord>& records,
                      const fs::path& path) {
  atomic_write(path, canonical_dump(credentials_to_json(records)));
}

Json to_json(const TaskInstance& inst) {
  Json chain = Json::array();
  for (const DelegationRecord& d : inst.delegation_chain) {
    chain.push_back(
        {{"from", d.from.str()}, {"to", d.to.str()}, {"by", d.by.str()}});
  }
  Json j = {{"id", inst.id.str()},
            {"tenant", inst.tenant.str()},
            {"task", inst.task.str()},
            {"activated_by", inst.activated_by.str()},
            {"holder", inst.holder.str()},
            {"state", to_string(inst.state)},
            {"usage_count", inst.usage_count},
            {"usage_limit", inst.usage_limit},
            {"delegation_chain", chain}};
  j["process_instance"] =
      inst.process_instance ? Json(inst.process_instance->str()) : Json(nullptr);
  return j;
}

namespace {

TaskInstance instance_from_json(const Json& j) {
  TaskInstance inst;
  inst.id = InstanceId(str_field(j, "id"));
  inst.tenant = TenantId(str_field(j, "tenant"));
  inst.task = TaskId(str_field(j, "task"));
  std::string pi = opt_str_field(j, "process_instance");
  if (!pi.empty()) inst.process_instance = ProcessInstanceId(pi);
  inst.activated_by = UserId(str_field(j, "activated_by"));
  inst.holder = UserId(str_field(j, "holder"));
  inst.state = instance_state_from_string(str_field(j, "state"));
  inst.usage_count = int_field(j, "usage_count");
  inst.usage_limit = int_field(j, "usage_limit");
  for (const Json& d : array_field(j, "delegation_chain")) {
    inst.delegation_chain.push_back({UserId(str_field(d, "from")),
                                     UserId(str_field(d, "to")),
                                     RoleId(str_field(d, "by"))});
  }
  return inst;
}

}  // namespace

Json runtime_state_to_json(const RuntimeState& state) {
  std::vector<TaskInstance> sorted = state.instances;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  Json instances = Json::array();
  for (const TaskInstance& inst : sorted) instances.push_back(to_json(inst));
  std::vector<SodHistoryEntry> history = state.sod_history;
  std::sort(history.begin(), history.end());
  Json hist = Json::array();
  for (const SodHistoryEntry& h : history) {
    hist.push_back({{"tenant", h.tenant.str()},
                    {"process_instance", h.process_instance.str()},
                    {"user", h.user.str()},
                    {"task", h.task.str()}});
  }
  return {{"format_version", kStateFormatVersion},
          {"instances", instances},
          {"sod_history", hist}};
}

RuntimeState runtime_state_from_json(const Json& doc) {
  return guarded([&] {
    if (int_field(doc, "format_version") != kStateFormatVersion) {
      throw Error(ErrorCode::kFormatVersion, "unsupported instances format");
    }
    RuntimeState state;
    for (const Json& j : array_field(doc, "instances")) {
      state.instances.push_back(instance_from_json(j));
    }
    for (const Json& j : array_field(doc, "sod_history")) {
      state.sod_history.push_back({TenantId(str_field(j, "tenant")),
                                   ProcessInstanceId(str_field(j, "process_instance")),
                                   UserId(str_field(j, "user")),
                                   TaskId(str_field(j, "task"))});
    }
    return state;
  });
}

RuntimeState load_runtime_state(const fs::path& path) {
  if (!fs::exists(path)) return {};
  return runtime_state_from_json(parse_text(read_file(path), path.string()));
}

void save_runtime_state(const RuntimeState& state, const fs::path& path) {
  atomic_write(path, canonical_dump(runtime_state_to_json(state)));
}

Json to_json(const Session& s) {
  return {{"token", s.token},
          {"user", s.user.str()},
          {"tenant", s.tenant.str()},
          {"active_roles", id_array(s.active_roles)},
          {"location", s.location.str()},
          {"issued_at", to_epoch_ms(s.issued_at)},
          {"expires_at", to_epoch_ms(s.expires_at)}};
}

Json to_json(const AccessDecision& d) {
  Json alerts = Json::array();
  for (const AlertRecord& a : d.alerts_emitted) alerts.push_back(to_json(a));
  return {{"verdict", to_string(d.verdict)},
          {"reason", to_string(d.reason)},
          {"usage_after", d.usage_after},
          {"alerts_emitted", alerts}};
}

Json to_json(const AlertRecord& a) {
  return {{"tenant", a.tenant.str()},
          {"kind", to_string(a.kind)},
          {"actor", a.actor},
          {"detail", {{"reason", a.reason}, {"endpoint", a.endpoint}}},
          {"timestamp", to_epoch_ms(a.timestamp)}};
}

AlertRecord alert_from_json(const Json& j) {
  return guarded([&] {
    AlertRecord a;
    a.tenant = TenantId(str_field(j, "tenant"));
    a.kind = alert_kind_from_string(str_field(j, "kind"));
    a.actor = field(j, "actor").get<std::map<std::string, std::string>>();
    const Json& detail = field(j, "detail");
    a.reason = str_field(detail, "reason");
    a.endpoint = str_field(detail, "endpoint");
    a.timestamp = from_epoch_ms(int_field(j, "timestamp"));
    return a;
  });
}

Json to_json(const AuditRecord& r) {
  Json j = {{"timestamp", to_epoch_ms(r.timestamp)},
            {"tenant", r.tenant},
            {"actor", r.actor},
            {"endpoint", r.endpoint},
            {"verdict", r.verdict},
            {"reason", r.reason}};
  if (r.instance) j["instance"] = *r.instance;
  if (r.permission) {
    j["operation"] = r.permission->operation;
    j["object"] = r.permission->object.str();
  }
  return j;
}

AuditRecord audit_record_from_json(const Json& j) {
  return guarded([&] {
    AuditRecord r;
    r.timestamp = from_epoch_ms(int_field(j, "timestamp"));
    r.tenant = opt_str_field(j, "tenant");
    r.actor = opt_str_field(j, "actor");
    r.endpoint = str_field(j, "endpoint");
    r.verdict = str_field(j, "verdict");
    r.reason = opt_str_field(j, "reason");
    if (j.contains("instance")) r.instance = str_field(j, "instance");
    if (j.contains("operation")) {
      r.permission = Permission{str_field(j, "operation"),
                                ObjectId(str_field(j, "object"))};
    }
    return r;
  });
}

void append_line(const fs::path& path, const std::string& line) {
  std::FILE* f = std::fopen(path.c_str(), "ab");
  if (f == nullptr) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  std::string out = line;
  out.push_back('\n');
  bool ok = std::fwrite(out.data(), 1, out.size(), f) == out.size();
  ok = std::fflush(f) == 0 && ok;
  std::fclose(f);
  if (!ok) throw Error(ErrorCode::kIoError, "append failed on " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  if (!fs::exists(path)) return {};
  std::string content = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) break;  // torn tail, if any, is dropped
    if (nl > start) lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

AuditLog::AuditLog(fs::path path) : path_(std::move(path)) {
  // Drop a torn tail so the next append starts on a fresh line.
  if (fs::exists(path_)) {
    std::string content = read_file(path_);
    if (!content.empty() && content.back() != '\n') {
      std::size_t nl = content.rfind('\n');
      fs::resize_file(path_, nl == std::string::npos ? 0 : nl + 1);
    }
  }
  std::vector<AuditRecord> existing = read_audit(path_);
  if (!existing.empty()) last_ = existing.back().timestamp;
}

AuditRecord AuditLog::append(AuditRecord record) {
  std::lock_guard lock(mu_);
  if (last_ && record.timestamp < *last_) record.timestamp = *last_;
  append_line(path_, to_json(record).dump());
  last_ = record.timestamp;
  return record;
}

std::vector<AuditRecord> AuditLog::read(const TimeWindow& window) const {
  std::lock_guard lock(mu_);
  return read_audit(path_, window);
}

std::vector<AuditRecord> read_audit(const fs::path& path,
                                    const TimeWindow& window) {
  std::vector<AuditRecord> out;
  for (const std::string& line : read_lines(path)) {
    AuditRecord r = audit_record_from_json(parse_text(line, path.string()));
    if (r.timestamp >= window.from && r.timestamp < window.to) {
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<AccessEvent> access_events_from_audit(
    const std::vector<AuditRecord>& records) {
  std::vector<AccessEvent> out;
  for (const AuditRecord& r : records) {
    if (r.endpoint != endpoint::kAccess || !r.permission || r.verdict != "permit") {
      continue;
    }
    AccessEvent e;
    e.timestamp = r.timestamp;
    e.tenant = TenantId(r.tenant);
    e.user = UserId(r.actor);
    e.instance = InstanceId(r.instance.value_or(""));
    e.permission = *r.permission;
    e.verdict = Verdict::kPermit;
    e.reason = Reason::kOk;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace trbac
