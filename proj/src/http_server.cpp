#include "httplib.h"
#include "trbac/gateway.hpp"

namespace trbac {

namespace {

std::optional<std::string> bearer_token(const httplib::Request& req) {
  if (!req.has_header("Authorization")) return std::nullopt;
  std::string value = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (value.rfind(kPrefix, 0) == 0) return value.substr(kPrefix.size());
  return value;
}

}  // namespace

HttpServer::HttpServer(Gateway& gateway)
    : gateway_(gateway), server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    RequestEnvelope env;
    env.method = req.method;
    env.endpoint = req.path;
    env.body = req.body;
    env.session_token = bearer_token(req);
    env.remote_addr = req.remote_addr;
    ResponseEnvelope out = gateway_.handle_request(env);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::kIoError,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace trbac
