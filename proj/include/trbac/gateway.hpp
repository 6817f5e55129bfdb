#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "trbac/alert_sink.hpp"
#include "trbac/authn.hpp"
#include "trbac/authz.hpp"
#include "trbac/persistence.hpp"
#include "trbac/policy_handle.hpp"

namespace httplib {
class Server;
}

namespace trbac {

struct GatewayConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::filesystem::path data_dir = "data";
  // Relative paths resolve against data_dir.
  std::filesystem::path policy_path = "policy.json";
  AuthnOptions authn;
  // Remote address -> location zone.
  std::map<std::string, LocationId> location_map;
  LocationId default_location{"unknown"};
  // Test mode: trust the location a client declares at login.
  bool allow_declared_location = false;
  std::map<TenantId, AlertSinkDescriptor> alert_sinks;
  // Transport used by mail sinks; stub outbox when unset.
  MailTransport mail_transport;
};

/// Parses the gateway config file. Throws kIoError / kParseError.
GatewayConfig load_gateway_config(const std::filesystem::path& path);
GatewayConfig gateway_config_from_json(const Json& doc,
                                       const std::filesystem::path& base = {});

struct RequestEnvelope {
  std::string method = "POST";
  std::string endpoint;
  std::string body;
  std::optional<std::string> session_token;
  std::string remote_addr;
};

struct ResponseEnvelope {
  int status = 200;
  Json body;
};

/// Policy enforcement point: routes each request through authentication and
/// the task engine, dispatching alerts for every tenant-attributable denial.
class Gateway {
 public:
  explicit Gateway(GatewayConfig config, Clock clock = system_clock());
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  ResponseEnvelope handle_request(const RequestEnvelope& request);

  /// Re-reads the policy file; keeps the current policy if it is invalid.
  void reload_policy();

  AlertDispatcher& alerts() { return *dispatcher_; }
  Engine& engine() { return *engine_; }
  SessionRegistry& sessions() { return sessions_; }
  const GatewayConfig& config() const { return config_; }
  std::filesystem::path credentials_path() const;
  std::filesystem::path instances_path() const;
  std::filesystem::path audit_path() const;
  std::filesystem::path alerts_dir() const;

 private:
  struct Call;

  ResponseEnvelope route(Call& call);
  ResponseEnvelope do_register(Call& call);
  ResponseEnvelope do_password(Call& call);
  ResponseEnvelope do_login(Call& call);
  ResponseEnvelope do_activate(Call& call);
  ResponseEnvelope do_access(Call& call);
  ResponseEnvelope do_complete(Call& call);
  ResponseEnvelope do_delegate(Call& call);
  ResponseEnvelope do_alerts(Call& call);

  std::optional<ResponseEnvelope> require_session(Call& call);
  LocationId observed_location(const RequestEnvelope& request,
                               const std::optional<std::string>& declared) const;
  void emit_alert(const AlertRecord& record);
  void persist_runtime();
  void persist_credentials();
  std::shared_ptr<AlertSink> make_sink(const TenantId& tenant);

  GatewayConfig config_;
  Clock clock_;
  PolicyHandle policy_;
  CredentialStore credentials_;
  SessionRegistry sessions_;
  std::unique_ptr<AlertDispatcher> dispatcher_;
  std::unique_ptr<Authenticator> authn_;
  std::unique_ptr<Engine> engine_;
  AuditLog audit_;
  std::mutex persist_mu_;
};

/// HTTP transport over a Gateway.
class HttpServer {
 public:
  explicit HttpServer(Gateway& gateway);
  ~HttpServer();

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves on a background thread.
  void start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();

 private:
  Gateway& gateway_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace trbac
