#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"
#include "trbac/authz.hpp"
#include "trbac/error.hpp"
#include "trbac/persistence.hpp"
#include "trbac/tooling/generator.hpp"

namespace trbac {
namespace {

using test::kAcme;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

TEST(PolicyJson, SampleRoundTrip) {
  test::TempDir dir;
  PolicyStore a = test::sample_policy();
  save_policy(a, dir / "p.json");
  PolicyStore b = load_policy(dir / "p.json");
  EXPECT_EQ(a, b);
  std::string first = read_file(dir / "p.json");
  save_policy(b, dir / "p.json");
  EXPECT_EQ(read_file(dir / "p.json"), first);
}

TEST(PolicyJson, GeneratedStoresRoundTrip) {
  test::TempDir dir;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    PolicyStore a = tooling::generate_policy(seed);
    save_policy(a, dir / "p.json");
    PolicyStore b = load_policy(dir / "p.json");
    save_policy(b, dir / "q.json");
    EXPECT_EQ(a, b) << "seed " << seed;
    EXPECT_EQ(read_file(dir / "p.json"), read_file(dir / "q.json"));
  }
}

TEST(PolicyJson, RejectsMalformedDocuments) {
  Json doc = policy_to_json(test::sample_policy());
  Json v2 = doc;
  v2["format_version"] = 2;
  EXPECT_EQ(code_of([&] { policy_from_json(v2); }), ErrorCode::kFormatVersion);

  Json dup = doc;
  dup["roles"].push_back(dup["roles"][0]);
  EXPECT_EQ(code_of([&] { policy_from_json(dup); }), ErrorCode::kParseError);

  Json missing = doc;
  missing["tasks"][0].erase("usage_limit");
  EXPECT_EQ(code_of([&] { policy_from_json(missing); }), ErrorCode::kParseError);

  Json wrong_type = doc;
  wrong_type["users"][0]["assigned_roles"] = "manager";
  EXPECT_EQ(code_of([&] { policy_from_json(wrong_type); }), ErrorCode::kParseError);
}

TEST(PolicyJson, LoadValidates) {
  try {
    load_policy(test::fixture("cyclic.json"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidationFailed);
    ASSERT_FALSE(e.diagnostics().empty());
    EXPECT_EQ(e.diagnostics()[0].kind, DiagnosticKind::kHierarchyCycle);
  }
  test::TempDir dir;
  EXPECT_EQ(code_of([&] { load_policy(dir / "absent.json"); }), ErrorCode::kIoError);
  std::ofstream(dir / "junk.json") << "{not json";
  EXPECT_EQ(code_of([&] { load_policy(dir / "junk.json"); }), ErrorCode::kParseError);
}

TEST(AtomicWrite, CrashBeforeRenameKeepsPrior) {
  test::TempDir dir;
  PolicyStore prior = test::sample_policy();
  save_policy(prior, dir / "p.json");
  const std::string before = read_file(dir / "p.json");

  PolicyStore next = prior;
  next.operations.insert("delete");
  WriteHooks crash;
  crash.before_rename = [](const std::filesystem::path&) { throw std::runtime_error("crash"); };
  EXPECT_THROW(save_policy(next, dir / "p.json", crash), std::runtime_error);
  EXPECT_EQ(read_file(dir / "p.json"), before);
  EXPECT_EQ(load_policy(dir / "p.json"), prior);
}

TEST(Credentials, RoundTripHoldsNoPlaintext) {
  test::TempDir dir;
  std::vector<CredentialRecord> recs{make_credential(kAcme, UserId("bob"), "hunter2-hunter2", 100),
                                     make_credential(kAcme, UserId("alice"), "open-sesame!", 100)};
  save_credentials(recs, dir / "c.json");
  auto back = load_credentials(dir / "c.json");
  ASSERT_EQ(back.size(), 2u);
  std::sort(recs.begin(), recs.end(), [](auto& a, auto& b) { return a.user < b.user; });
  EXPECT_EQ(back, recs);
  std::string raw = read_file(dir / "c.json");
  EXPECT_EQ(raw.find("hunter2"), std::string::npos);
  EXPECT_EQ(raw.find("open-sesame"), std::string::npos);
  EXPECT_TRUE(load_credentials(dir / "none.json").empty());
}

TEST(RuntimeStateJson, RoundTrip) {
  test::TempDir dir;
  TaskInstance inst;
  inst.id = InstanceId("ti-1");
  inst.tenant = kAcme;
  inst.task = TaskId("enter_invoice");
  inst.process_instance = ProcessInstanceId("inv-1");
  inst.activated_by = UserId("bob");
  inst.holder = UserId("carol");
  inst.state = InstanceState::kDeactivated;
  inst.usage_count = 3;
  inst.usage_limit = 3;
  inst.delegation_chain.push_back({UserId("bob"), UserId("carol"), RoleId("manager")});
  RuntimeState state{{inst}, {{kAcme, ProcessInstanceId("inv-1"), UserId("bob"), TaskId("enter_invoice")}}};
  save_runtime_state(state, dir / "s.json");
  RuntimeState back = load_runtime_state(dir / "s.json");
  EXPECT_EQ(back.instances, state.instances);
  EXPECT_EQ(back.sod_history, state.sod_history);
  EXPECT_TRUE(load_runtime_state(dir / "none.json").instances.empty());
}

TEST(AlertJson, RoundTrip) {
  AlertRecord r;
  r.tenant = kAcme;
  r.kind = AlertKind::kMaliciousInsider;
  r.actor = {{"user", "bob"}, {"location", "hq"}};
  r.reason = "not-holder";
  r.endpoint = "/v1/access";
  r.timestamp = from_epoch_ms(1'700'000'000'123);
  Json j = to_json(r);
  EXPECT_EQ(j["kind"], "malicious-insider");
  EXPECT_EQ(j["detail"]["reason"], "not-holder");
  AlertRecord back = alert_from_json(j);
  EXPECT_EQ(back.kind, r.kind);
  EXPECT_EQ(back.actor, r.actor);
  EXPECT_EQ(back.timestamp, r.timestamp);
}

AuditRecord audit_at(std::int64_t ms, std::string reason = "ok") {
  AuditRecord r;
  r.timestamp = from_epoch_ms(ms);
  r.tenant = "acme";
  r.actor = "bob";
  r.endpoint = "/v1/access";
  r.verdict = reason == "ok" ? "permit" : "deny";
  r.reason = std::move(reason);
  r.instance = "ti-1";
  r.permission = Permission{"read", ObjectId("invoice")};
  return r;
}

TEST(AuditLogTest, MonotoneWindowedAndTornTail) {
  test::TempDir dir;
  {
    AuditLog log(dir / "audit.log");
    log.append(audit_at(1000));
    log.append(audit_at(3000, "not-holder"));
    AuditRecord clamped = log.append(audit_at(2000));
    EXPECT_EQ(to_epoch_ms(clamped.timestamp), 3000);
    EXPECT_EQ(log.read().size(), 3u);
    EXPECT_EQ(log.read({from_epoch_ms(1000), from_epoch_ms(3000)}).size(), 1u);
  }
  {
    std::ofstream torn(dir / "audit.log", std::ios::app);
    torn << R"({"timestamp": 4000, "ten)";
  }
  EXPECT_EQ(read_audit(dir / "audit.log").size(), 3u);
  AuditLog reopened(dir / "audit.log");
  AuditRecord r = reopened.append(audit_at(500));
  EXPECT_EQ(to_epoch_ms(r.timestamp), 3000);
  auto all = reopened.read();
  ASSERT_EQ(all.size(), 4u);
  for (std::size_t i = 1; i < all.size(); ++i) {
    EXPECT_LE(all[i - 1].timestamp, all[i].timestamp);
  }
  // Only permitted accesses count as exercised.
  EXPECT_EQ(access_events_from_audit(all).size(), 3u);
}

}  // namespace
}  // namespace trbac
