#include "trbac/gateway.hpp"

#include <algorithm>

namespace trbac {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kUniformLoginFailure =
    "invalid tenant, user or password";
constexpr std::string_view kRegistrationRejected = "registration-rejected";

struct MalformedRequest {
  std::string reason;
};

ResponseEnvelope error_response(int status, std::string_view code,
                                std::string_view reason) {
  return {status, {{"error", code}, {"reason", reason}}};
}

std::string required_string(const Json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || !it->is_string()) {
    throw MalformedRequest{std::string("field '") + name +
                           "' is required and must be a string"};
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const Json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw MalformedRequest{std::string("field '") + name + "' must be a string"};
  }
  return it->get<std::string>();
}

std::string required_id(const Json& body, const char* name) {
  std::string v = required_string(body, name);
  if (!is_valid_identifier(v)) {
    throw MalformedRequest{std::string("field '") + name +
                           "' is not a valid identifier"};
  }
  return v;
}

fs::path under(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

}  // namespace

struct Gateway::Call {
  const RequestEnvelope& request;
  Json body = Json::object();
  std::optional<Session> session;
  AuditRecord audit;
};

GatewayConfig gateway_config_from_json(const Json& doc, const fs::path& base) {
  GatewayConfig cfg;
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kParseError, "config must be an object");
    if (auto it = doc.find("listen"); it != doc.end()) {
      std::string listen = it->get<std::string>();
      auto colon = listen.rfind(':');
      if (colon == std::string::npos) {
        throw Error(ErrorCode::kParseError, "listen must be host:port");
      }
      cfg.listen_host = listen.substr(0, colon);
      cfg.listen_port = std::stoi(listen.substr(colon + 1));
    }
    if (auto it = doc.find("data_dir"); it != doc.end()) {
      cfg.data_dir = under(base, it->get<std::string>());
    } else if (!base.empty()) {
      cfg.data_dir = base / cfg.data_dir;
    }
    if (auto it = doc.find("policy"); it != doc.end()) {
      cfg.policy_path = it->get<std::string>();
    }
    if (auto it = doc.find("session_ttl_seconds"); it != doc.end()) {
      cfg.authn.session_ttl = std::chrono::seconds(it->get<std::int64_t>());
    }
    if (auto it = doc.find("pending_ttl_seconds"); it != doc.end()) {
      cfg.authn.pending_ttl = std::chrono::seconds(it->get<std::int64_t>());
    }
    if (auto it = doc.find("hash_iterations"); it != doc.end()) {
      cfg.authn.hash_iterations = it->get<std::int64_t>();
    }
    if (auto it = doc.find("min_password_length"); it != doc.end()) {
      cfg.authn.min_password_length = it->get<std::size_t>();
    }
    if (auto it = doc.find("enforce_location_at_login"); it != doc.end()) {
      cfg.authn.enforce_location_at_login = it->get<bool>();
    }
    if (auto it = doc.find("location_map"); it != doc.end()) {
      for (const auto& [addr, zone] : it->items()) {
        cfg.location_map.emplace(addr, LocationId(zone.get<std::string>()));
      }
    }
    if (auto it = doc.find("default_location"); it != doc.end()) {
      cfg.default_location = LocationId(it->get<std::string>());
    }
    if (auto it = doc.find("allow_declared_location"); it != doc.end()) {
      cfg.allow_declared_location = it->get<bool>();
    }
    if (auto it = doc.find("alert_sinks"); it != doc.end()) {
      for (const auto& [tenant, sink] : it->items()) {
        AlertSinkDescriptor d;
        std::string kind = sink.value("kind", "log");
        if (kind == "mail") {
          d.kind = AlertSinkDescriptor::Kind::kMail;
        } else if (kind != "log") {
          throw Error(ErrorCode::kParseError, "unknown alert sink kind " + kind);
        }
        d.address = sink.value("address", "");
        cfg.alert_sinks.emplace(TenantId(tenant), d);
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("gateway config: ") + e.what());
  }
  if (cfg.authn.hash_iterations < 1 || cfg.authn.session_ttl.count() <= 0) {
    throw Error(ErrorCode::kParseError,
                "hash_iterations and session_ttl_seconds must be positive");
  }
  return cfg;
}

GatewayConfig load_gateway_config(const fs::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return gateway_config_from_json(doc, path.parent_path());
}

Gateway::Gateway(GatewayConfig config, Clock clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      policy_(load_policy(under(config_.data_dir, config_.policy_path))),
      credentials_(load_credentials(config_.data_dir / "credentials.json")),
      audit_(config_.data_dir / "audit.log") {
  fs::create_directories(alerts_dir());
  dispatcher_ = std::make_unique<AlertDispatcher>(
      [this](const TenantId& t) { return make_sink(t); });
  AlertEmitter emit = [this](const AlertRecord& r) { emit_alert(r); };
  authn_ = std::make_unique<Authenticator>(policy_, credentials_, sessions_,
                                           emit, config_.authn, clock_);
  engine_ = std::make_unique<Engine>(policy_, emit, clock_);
  RuntimeState state = load_runtime_state(instances_path());
  engine_->restore(std::move(state.instances), std::move(state.sod_history));
}

Gateway::~Gateway() {
  if (dispatcher_) dispatcher_->flush();
}

fs::path Gateway::credentials_path() const {
  return config_.data_dir / "credentials.json";
}
fs::path Gateway::instances_path() const {
  return config_.data_dir / "instances.json";
}
fs::path Gateway::audit_path() const { return config_.data_dir / "audit.log"; }
fs::path Gateway::alerts_dir() const { return config_.data_dir / "alerts"; }

void Gateway::reload_policy() {
  policy_.set(load_policy(under(config_.data_dir, config_.policy_path)));
}

std::shared_ptr<AlertSink> Gateway::make_sink(const TenantId& tenant) {
  AlertSinkDescriptor descriptor;
  if (auto it = config_.alert_sinks.find(tenant);
      it != config_.alert_sinks.end()) {
    descriptor = it->second;
  } else if (const Tenant* t = policy_.get()->find_tenant(tenant)) {
    descriptor = t->alert_sink;
  } else {
    return nullptr;
  }
  if (descriptor.kind == AlertSinkDescriptor::Kind::kMail) {
    return std::make_shared<MailAlertSink>(descriptor.address,
                                           config_.mail_transport);
  }
  return std::make_shared<LogAlertSink>(alerts_dir() / (tenant.str() + ".log"));
}

void Gateway::emit_alert(const AlertRecord& record) {
  dispatcher_->dispatch(record);
}

void Gateway::persist_runtime() {
  std::lock_guard lock(persist_mu_);
  save_runtime_state({engine_->instances(), engine_->sod_history()},
                     instances_path());
}

void Gateway::persist_credentials() {
  std::lock_guard lock(persist_mu_);
  save_credentials(credentials_.snapshot(), credentials_path());
}

LocationId Gateway::observed_location(
    const RequestEnvelope& request,
    const std::optional<std::string>& declared) const {
  if (declared && config_.allow_declared_location) return LocationId(*declared);
  if (auto it = config_.location_map.find(request.remote_addr);
      it != config_.location_map.end()) {
    return it->second;
  }
  return config_.default_location;
}

ResponseEnvelope Gateway::handle_request(const RequestEnvelope& request) {
  Call call{request, Json::object(), std::nullopt, {}};
  call.audit.endpoint = request.endpoint;
  ResponseEnvelope response;
  try {
    if (!request.body.empty()) {
      try {
        call.body = Json::parse(request.body);
      } catch (const Json::parse_error&) {
        throw MalformedRequest{"body is not valid JSON"};
      }
      if (!call.body.is_object()) {
        throw MalformedRequest{"body must be a JSON object"};
      }
    }
    response = route(call);
  } catch (const MalformedRequest& m) {
    response = error_response(400, "malformed-request", m.reason);
  }

  call.audit.timestamp = clock_();
  call.audit.verdict = response.status < 300 ? "permit" : "deny";
  if (call.audit.reason.empty()) {
    call.audit.reason = response.status < 300
                            ? "ok"
                            : response.body.value("reason", std::string());
  }
  try {
    audit_.append(call.audit);
  } catch (const Error&) {
    // The decision stands even if the audit log is unwritable.
  }
  return response;
}

ResponseEnvelope Gateway::route(Call& call) {
  const std::string& path = call.request.endpoint;
  const std::string& method = call.request.method;
  if (method == "GET" && path == endpoint::kAlerts) return do_alerts(call);
  if (method != "POST") return error_response(404, "not-found", "no such endpoint");
  if (path == endpoint::kRegister) return do_register(call);
  if (path == endpoint::kPassword) return do_password(call);
  if (path == endpoint::kLogin) return do_login(call);
  if (path == endpoint::kActivate) return do_activate(call);
  if (path == endpoint::kAccess) return do_access(call);
  if (path == endpoint::kComplete) return do_complete(call);
  if (path == endpoint::kDelegate) return do_delegate(call);
  return error_response(404, "not-found", "no such endpoint");
}

ResponseEnvelope Gateway::do_register(Call& call) {
  const std::string tenant = required_id(call.body, "tenant");
  const std::string name = required_string(call.body, "name");
  const std::string designation = required_string(call.body, "designation");
  const std::string employee_id = required_string(call.body, "employee_id");
  call.audit.tenant = tenant;
  call.audit.actor = employee_id;
  try {
    PendingRegistration p =
        authn_->register_user(TenantId(tenant), name, designation, employee_id);
    return {200,
            {{"registration_token", p.token},
             {"tenant", p.tenant.str()},
             {"user", p.user.str()},
             {"expires_at", to_epoch_ms(p.expires_at)}}};
  } catch (const Error& e) {
    call.audit.reason = std::string(to_string(e.code()));
    return error_response(403, "access-denied", kRegistrationRejected);
  }
}

ResponseEnvelope Gateway::do_password(Call& call) {
  const std::string token = required_string(call.body, "registration_token");
  const std::string password = required_string(call.body, "password");
  try {
    CredentialRecord record = authn_->set_password(token, password);
    call.audit.tenant = record.tenant.str();
    call.audit.actor = record.user.str();
    persist_credentials();
    return {200,
            {{"tenant", record.tenant.str()},
             {"user", record.user.str()},
             {"algorithm_tag", record.algorithm_tag},
             {"iterations", record.iterations},
             {"status", "active"}}};
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kWeakPassword:
        return error_response(400, "malformed-request", "weak-password");
      case ErrorCode::kAlreadyRegistered:
        call.audit.reason = "already-registered";
        return error_response(403, "access-denied", kRegistrationRejected);
      default:
        return error_response(401, "bad-credentials", "pending-expired");
    }
  }
}

ResponseEnvelope Gateway::do_login(Call& call) {
  const std::string tenant = required_id(call.body, "tenant");
  const std::string user = required_id(call.body, "user");
  const std::string password = required_string(call.body, "password");
  std::optional<std::string> declared = optional_string(call.body, "location");
  if (declared && !is_valid_identifier(*declared)) {
    throw MalformedRequest{"field 'location' is not a valid identifier"};
  }
  call.audit.tenant = tenant;
  call.audit.actor = user;
  const LocationId location = observed_location(call.request, declared);
  try {
    Session s = authn_->authenticate(TenantId(tenant), UserId(user), password,
                                     location);
    return {200, to_json(s)};
  } catch (const Error& e) {
    call.audit.reason = std::string(to_string(e.code()));
    if (e.code() == ErrorCode::kLocationForbidden) {
      return error_response(403, "access-denied", "location-forbidden");
    }
    return error_response(401, "bad-credentials", kUniformLoginFailure);
  }
}

std::optional<ResponseEnvelope> Gateway::require_session(Call& call) {
  if (!call.request.session_token || call.request.session_token->empty()) {
    return error_response(401, "bad-credentials", "missing-session");
  }
  call.session = sessions_.find(*call.request.session_token);
  if (!call.session) {
    return error_response(401, "bad-credentials", "invalid-session");
  }
  call.audit.tenant = call.session->tenant.str();
  call.audit.actor = call.session->user.str();
  return std::nullopt;
}

namespace {

ResponseEnvelope engine_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kSessionExpired:
      return error_response(401, "bad-credentials", "session-expired");
    case ErrorCode::kUnknownInstance:
      return error_response(404, "not-found", "unknown-instance");
    default:
      return error_response(403, "access-denied", to_string(e.code()));
  }
}

}  // namespace

ResponseEnvelope Gateway::do_activate(Call& call) {
  if (auto denied = require_session(call)) return *denied;
  const std::string task = required_id(call.body, "task");
  std::optional<std::string> pi = optional_string(call.body, "process_instance");
  if (pi && !is_valid_identifier(*pi)) {
    throw MalformedRequest{"field 'process_instance' is not a valid identifier"};
  }
  try {
    std::optional<ProcessInstanceId> process;
    if (pi) process = ProcessInstanceId(*pi);
    TaskInstance inst = engine_->activate_task(*call.session, TaskId(task), process);
    call.audit.instance = inst.id.str();
    persist_runtime();
    return {200, to_json(inst)};
  } catch (const Error& e) {
    return engine_error(e);
  }
}

ResponseEnvelope Gateway::do_access(Call& call) {
  if (auto denied = require_session(call)) return *denied;
  const std::string instance = required_string(call.body, "instance");
  const std::string operation = required_string(call.body, "operation");
  const std::string object = required_string(call.body, "object");
  Permission perm{operation, ObjectId(object)};
  call.audit.instance = instance;
  call.audit.permission = perm;
  try {
    AccessDecision d =
        engine_->check_access(*call.session, InstanceId(instance), perm);
    if (d.verdict == Verdict::kPermit) {
      persist_runtime();
      return {200, to_json(d)};
    }
    if (d.reason == Reason::kSessionExpired) {
      return error_response(401, "bad-credentials", "session-expired");
    }
    ResponseEnvelope r = error_response(403, "access-denied", to_string(d.reason));
    r.body["usage_after"] = d.usage_after;
    return r;
  } catch (const Error& e) {
    return engine_error(e);
  }
}

ResponseEnvelope Gateway::do_complete(Call& call) {
  if (auto denied = require_session(call)) return *denied;
  const std::string instance = required_string(call.body, "instance");
  call.audit.instance = instance;
  try {
    TaskInstance inst = engine_->complete_task(*call.session, InstanceId(instance));
    persist_runtime();
    return {200, to_json(inst)};
  } catch (const Error& e) {
    return engine_error(e);
  }
}

ResponseEnvelope Gateway::do_delegate(Call& call) {
  if (auto denied = require_session(call)) return *denied;
  const std::string instance = required_string(call.body, "instance");
  const std::string to_user = required_id(call.body, "to_user");
  call.audit.instance = instance;
  try {
    TaskInstance inst = engine_->delegate_task(*call.session, InstanceId(instance),
                                               UserId(to_user));
    persist_runtime();
    return {200, to_json(inst)};
  } catch (const Error& e) {
    return engine_error(e);
  }
}

ResponseEnvelope Gateway::do_alerts(Call& call) {
  if (auto denied = require_session(call)) return *denied;
  const Session& s = *call.session;
  auto raise = [&](AlertKind kind, std::string_view reason) {
    AlertRecord r;
    r.tenant = s.tenant;
    r.kind = kind;
    r.actor = {{"user", s.user.str()}, {"location", s.location.str()}};
    r.reason = std::string(reason);
    r.endpoint = std::string(endpoint::kAlerts);
    r.timestamp = clock_();
    emit_alert(r);
  };
  if (s.expired(clock_())) {
    raise(AlertKind::kUnauthorizedAttempt, "session-expired");
    return error_response(401, "bad-credentials", "session-expired");
  }
  const Tenant* tenant = policy_.get()->find_tenant(s.tenant);
  if (tenant == nullptr || !tenant->admins.contains(s.user)) {
    raise(AlertKind::kMaliciousInsider, "not-tenant-admin");
    return error_response(403, "access-denied", "not-tenant-admin");
  }
  dispatcher_->flush();
  Json alerts = Json::array();
  if (auto sink = dispatcher_->sink_for(s.tenant)) {
    for (const AlertRecord& r : sink->history()) alerts.push_back(to_json(r));
  }
  return {200, {{"tenant", s.tenant.str()}, {"alerts", alerts}}};
}

}  // namespace trbac
