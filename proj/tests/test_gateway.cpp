#include <gtest/gtest.h>

#include "httplib.h"
#include "gateway_support.hpp"
#include "trbac/persistence.hpp"

namespace trbac {
namespace {

using test::Client;

std::vector<AlertRecord> drained(Gateway& gw) {
  gw.alerts().flush();
  return gw.alerts().sink_for(test::kAcme)->history();
}

class GatewayTest : public ::testing::Test {
 protected:
  GatewayTest() : gw(test::gateway_config(dir.path()), clock.as_clock()), client(gw) {}

  std::string session(const std::string& user, const std::string& pw,
                      const std::string& loc = "hq") {
    ResponseEnvelope r = client.login(user, pw, loc);
    EXPECT_EQ(r.status, 200) << r.body.dump();
    return r.body.value("token", "");
  }

  test::TempDir dir;
  ManualClock clock;
  Gateway gw;
  Client client;
};

TEST_F(GatewayTest, EndToEndTaskLifecycle) {
  ASSERT_EQ(client.enroll("Bob Tran", "clerk", "E200", "ledger-pass").status, 200);
  std::string bob = session("bob", "ledger-pass");

  ResponseEnvelope act = client.post("/v1/tasks/activate",
                                     {{"task", "enter_invoice"}, {"process_instance", "inv-1"}}, bob);
  ASSERT_EQ(act.status, 200) << act.body.dump();
  std::string id = act.body["id"];
  EXPECT_EQ(act.body["state"], "active");

  ResponseEnvelope ok = client.post(
      "/v1/access", {{"instance", id}, {"operation", "read"}, {"object", "invoice"}}, bob);
  EXPECT_EQ(ok.status, 200);
  EXPECT_EQ(ok.body["verdict"], "permit");
  EXPECT_EQ(ok.body["usage_after"], 1);

  ASSERT_EQ(client.post("/v1/tasks/complete", {{"instance", id}}, bob).status, 200);
  ResponseEnvelope after = client.post(
      "/v1/access", {{"instance", id}, {"operation", "read"}, {"object", "invoice"}}, bob);
  EXPECT_EQ(after.status, 403);
  EXPECT_EQ(after.body["reason"], "task-not-active");

  auto alerts = drained(gw);
  ASSERT_EQ(alerts.size(), 1u);
  EXPECT_EQ(alerts[0].kind, AlertKind::kMaliciousInsider);

  auto audit = read_audit(gw.audit_path());
  EXPECT_EQ(audit.size(), 7u);
}

TEST_F(GatewayTest, LoginFailuresIdentical) {
  ASSERT_EQ(client.enroll("Bob Tran", "clerk", "E200", "ledger-pass").status, 200);
  ResponseEnvelope wrong = client.login("bob", "not-the-pass");
  ResponseEnvelope unknown = client.login("mallory", "not-the-pass");
  ResponseEnvelope inactive = client.login("carol", "not-the-pass");
  EXPECT_EQ(wrong.status, 401);
  EXPECT_EQ(wrong.status, unknown.status);
  EXPECT_EQ(wrong.body.dump(), unknown.body.dump());
  EXPECT_EQ(wrong.body.dump(), inactive.body.dump());
  EXPECT_EQ(drained(gw).size(), 3u);
}

TEST_F(GatewayTest, RegistrationFailuresAreOpaque) {
  ResponseEnvelope mismatch = client.post("/v1/register", {{"tenant", "acme"},
                                                           {"name", "Bob Tron"},
                                                           {"designation", "clerk"},
                                                           {"employee_id", "E200"}});
  EXPECT_EQ(mismatch.status, 403);
  EXPECT_EQ(mismatch.body["reason"], "registration-rejected");
  ASSERT_EQ(client.enroll("Bob Tran", "clerk", "E200", "ledger-pass").status, 200);
  ResponseEnvelope again = client.enroll("Bob Tran", "clerk", "E200", "ledger-pass");
  EXPECT_EQ(again.body.dump(), mismatch.body.dump());
  auto alerts = drained(gw);
  ASSERT_EQ(alerts.size(), 2u);
  for (const auto& a : alerts) EXPECT_EQ(a.kind, AlertKind::kUnauthorizedAttempt);
}

TEST_F(GatewayTest, WeakPasswordIsMalformed) {
  ResponseEnvelope reg = client.post("/v1/register", {{"tenant", "acme"},
                                                      {"name", "Bob Tran"},
                                                      {"designation", "clerk"},
                                                      {"employee_id", "E200"}});
  ResponseEnvelope weak = client.post(
      "/v1/password", {{"registration_token", reg.body["registration_token"]}, {"password", "x"}});
  EXPECT_EQ(weak.status, 400);
  EXPECT_EQ(weak.body["reason"], "weak-password");
}

TEST_F(GatewayTest, SessionChecks) {
  EXPECT_EQ(client.post("/v1/tasks/activate", {{"task", "enter_invoice"}}).status, 401);
  EXPECT_EQ(client.post("/v1/tasks/activate", {{"task", "enter_invoice"}}, "bogus").body["reason"],
            "invalid-session");

  ASSERT_EQ(client.enroll("Bob Tran", "clerk", "E200", "ledger-pass").status, 200);
  std::string bob = session("bob", "ledger-pass");
  clock.advance(std::chrono::minutes(31));
  ResponseEnvelope expired = client.post("/v1/tasks/activate", {{"task", "enter_invoice"}}, bob);
  EXPECT_EQ(expired.status, 401);
  EXPECT_EQ(expired.body["reason"], "session-expired");
  auto alerts = drained(gw);
  ASSERT_EQ(alerts.size(), 1u);
  EXPECT_EQ(alerts[0].kind, AlertKind::kUnauthorizedAttempt);
}

TEST_F(GatewayTest, MalformedAndUnknown) {
  RequestEnvelope r;
  r.endpoint = "/v1/login";
  r.body = "{oops";
  EXPECT_EQ(gw.handle_request(r).status, 400);
  r.body = "[1]";
  EXPECT_EQ(gw.handle_request(r).status, 400);
  EXPECT_EQ(client.post("/v1/login", {{"tenant", "acme"}}).status, 400);
  EXPECT_EQ(client.post("/v1/nope", Json::object()).status, 404);
  EXPECT_EQ(client.get("/v1/login").status, 404);
}

TEST_F(GatewayTest, AlertsVisibleToAdminsOnly) {
  ASSERT_EQ(client.enroll("Alice Moreau", "manager", "E100", "admin-pass").status, 200);
  ASSERT_EQ(client.enroll("Bob Tran", "clerk", "E200", "ledger-pass").status, 200);
  std::string bob = session("bob", "ledger-pass");
  ResponseEnvelope denied = client.get("/v1/alerts", bob);
  EXPECT_EQ(denied.status, 403);

  std::string alice = session("alice", "admin-pass");
  ResponseEnvelope listing = client.get("/v1/alerts", alice);
  ASSERT_EQ(listing.status, 200);
  ASSERT_EQ(listing.body["alerts"].size(), 1u);
  EXPECT_EQ(listing.body["alerts"][0]["kind"], "malicious-insider");
  EXPECT_EQ(listing.body["alerts"][0]["detail"]["reason"], "not-tenant-admin");
}

TEST_F(GatewayTest, DelegationOverHttpEnvelope) {
  ASSERT_EQ(client.enroll("Alice Moreau", "manager", "E100", "admin-pass").status, 200);
  ASSERT_EQ(client.enroll("Bob Tran", "clerk", "E200", "ledger-pass").status, 200);
  std::string bob = session("bob", "ledger-pass");
  std::string alice = session("alice", "admin-pass");
  std::string id = client.post("/v1/tasks/activate", {{"task", "enter_invoice"}}, bob).body["id"];
  ResponseEnvelope self = client.post("/v1/tasks/delegate", {{"instance", id}, {"to_user", "carol"}}, bob);
  EXPECT_EQ(self.status, 403);
  EXPECT_EQ(self.body["reason"], "not-superior");
  ResponseEnvelope ok = client.post("/v1/tasks/delegate", {{"instance", id}, {"to_user", "carol"}}, alice);
  ASSERT_EQ(ok.status, 200) << ok.body.dump();
  EXPECT_EQ(ok.body["holder"], "carol");
  EXPECT_EQ(client.post("/v1/tasks/complete", {{"instance", "ti-none"}}, bob).status, 404);
}

TEST_F(GatewayTest, StatePersistsAcrossRestart) {
  ASSERT_EQ(client.enroll("Bob Tran", "clerk", "E200", "ledger-pass").status, 200);
  std::string bob = session("bob", "ledger-pass");
  std::string id = client.post("/v1/tasks/activate", {{"task", "enter_invoice"}}, bob).body["id"];
  client.post("/v1/access", {{"instance", id}, {"operation", "read"}, {"object", "invoice"}}, bob);

  GatewayConfig cfg = gw.config();
  Gateway second(cfg, clock.as_clock());
  Client c2(second);
  ResponseEnvelope login = c2.login("bob", "ledger-pass");
  ASSERT_EQ(login.status, 200);
  ResponseEnvelope r = c2.post("/v1/access",
                               {{"instance", id}, {"operation", "read"}, {"object", "invoice"}},
                               login.body["token"].get<std::string>());
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["usage_after"], 2);
}

TEST_F(GatewayTest, ReloadKeepsPolicyWhenInvalid) {
  std::filesystem::copy_file(test::fixture("cyclic.json"), dir / "policy.json",
                             std::filesystem::copy_options::overwrite_existing);
  EXPECT_THROW(gw.reload_policy(), Error);
  ASSERT_EQ(client.enroll("Bob Tran", "clerk", "E200", "ledger-pass").status, 200);
}

TEST(GatewayConfigTest, ParsesListenAndOverrides) {
  Json doc = {{"listen", "0.0.0.0:9090"},
              {"data_dir", "state"},
              {"session_ttl_seconds", 60},
              {"hash_iterations", 5000},
              {"location_map", {{"10.0.0.1", "hq"}}},
              {"alert_sinks", {{"acme", {{"kind", "mail"}, {"address", "sec@acme.test"}}}}}};
  GatewayConfig cfg = gateway_config_from_json(doc, "/etc/trbac");
  EXPECT_EQ(cfg.listen_host, "0.0.0.0");
  EXPECT_EQ(cfg.listen_port, 9090);
  EXPECT_EQ(cfg.data_dir, std::filesystem::path("/etc/trbac/state"));
  EXPECT_EQ(cfg.authn.session_ttl, std::chrono::seconds(60));
  EXPECT_EQ(cfg.authn.hash_iterations, 5000);
  EXPECT_EQ(cfg.location_map.at("10.0.0.1"), LocationId("hq"));
  EXPECT_EQ(cfg.alert_sinks.at(test::kAcme).kind, AlertSinkDescriptor::Kind::kMail);
  EXPECT_THROW(gateway_config_from_json({{"listen", "nocolon"}}), Error);
}

TEST(HttpServerTest, ServesOverLoopback) {
  test::TempDir dir;
  Gateway gw(test::gateway_config(dir.path()));
  Client direct(gw);
  ASSERT_EQ(direct.enroll("Bob Tran", "clerk", "E200", "ledger-pass").status, 200);

  HttpServer server(gw);
  int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  server.start();

  httplib::Client http("127.0.0.1", port);
  auto login = http.Post("/v1/login",
                         R"({"tenant":"acme","user":"bob","password":"ledger-pass","location":"hq"})",
                         "application/json");
  ASSERT_TRUE(login);
  ASSERT_EQ(login->status, 200);
  std::string token = Json::parse(login->body)["token"];

  httplib::Headers auth{{"Authorization", "Bearer " + token}};
  auto act = http.Post("/v1/tasks/activate", auth, R"({"task":"enter_invoice"})", "application/json");
  ASSERT_TRUE(act);
  EXPECT_EQ(act->status, 200);

  auto bad = http.Post("/v1/login", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto missing = http.Post("/v1/tasks/activate", R"({"task":"enter_invoice"})", "application/json");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 401);
  server.stop();
}

TEST(MailSinkTest, RetriesThenRecords) {
  int calls = 0;
  MailAlertSink sink("sec@acme.test", [&](const MailMessage&) { return ++calls >= 2; });
  AlertRecord r;
  r.tenant = test::kAcme;
  r.reason = "not-holder";
  sink.deliver(r);
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(sink.outbox().size(), 1u);
  MailAlertSink dead("x@y.test", [](const MailMessage&) { return false; });
  EXPECT_THROW(dead.deliver(r), Error);
}

TEST(DispatcherTest, FailingSinkDoesNotBlock) {
  struct Broken : AlertSink {
    void deliver(const AlertRecord&) override { throw Error(ErrorCode::kIoError, "down"); }
    std::vector<AlertRecord> history() const override { return {}; }
  };
  AlertDispatcher d([](const TenantId&) { return std::make_shared<Broken>(); });
  AlertRecord r;
  r.tenant = test::kAcme;
  for (int i = 0; i < 5; ++i) d.dispatch(r);
  d.flush();
  EXPECT_EQ(d.dispatched(), 5u);
  EXPECT_EQ(d.errors(), 5u);
}

}  // namespace
}  // namespace trbac
