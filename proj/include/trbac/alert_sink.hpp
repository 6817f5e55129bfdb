#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "trbac/alert.hpp"
#include "trbac/policy.hpp"

namespace trbac {

class AlertSink {
 public:
  virtual ~AlertSink() = default;
  /// Throws on delivery failure.
  virtual void deliver(const AlertRecord& record) = 0;
  /// Records delivered so far, oldest first.
  virtual std::vector<AlertRecord> history() const = 0;
};

/// Append-only JSON-lines file, one per tenant.
class LogAlertSink : public AlertSink {
 public:
  explicit LogAlertSink(std::filesystem::path path);
  void deliver(const AlertRecord& record) override;
  std::vector<AlertRecord> history() const override;

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
};

struct MailMessage {
  std::string to;
  std::string subject;
  std::string body;
};

/// Returns false on a transient failure.
using MailTransport = std::function<bool(const MailMessage&)>;

/// Outbound mail client stub: formats the alert as a message and hands it
/// to the transport, retrying transient failures.
class MailAlertSink : public AlertSink {
 public:
  MailAlertSink(std::string address, MailTransport transport = {},
                int max_attempts = 3);
  void deliver(const AlertRecord& record) override;
  std::vector<AlertRecord> history() const override;
  std::vector<MailMessage> outbox() const;

 private:
  std::string address_;
  MailTransport transport_;
  int max_attempts_;
  mutable std::mutex mu_;
  std::vector<AlertRecord> sent_;
  std::vector<MailMessage> outbox_;
};

struct DeliveryReceipt {
  TenantId tenant;
  std::uint64_t sequence = 0;
};

/// Queues alerts and delivers them on a background thread, preserving
/// per-tenant order. Sink failures are counted, never propagated.
class AlertDispatcher {
 public:
  using SinkResolver = std::function<std::shared_ptr<AlertSink>(const TenantId&)>;

  explicit AlertDispatcher(SinkResolver resolver);
  ~AlertDispatcher();

  AlertDispatcher(const AlertDispatcher&) = delete;
  AlertDispatcher& operator=(const AlertDispatcher&) = delete;

  DeliveryReceipt dispatch(const AlertRecord& record);
  /// Blocks until every queued alert has been attempted.
  void flush();

  std::shared_ptr<AlertSink> sink_for(const TenantId& tenant);
  std::uint64_t dispatched() const { return dispatched_.load(); }
  std::uint64_t delivered() const { return delivered_.load(); }
  std::uint64_t errors() const { return errors_.load(); }

 private:
  void run();

  SinkResolver resolver_;
  std::mutex sinks_mu_;
  std::map<TenantId, std::shared_ptr<AlertSink>> sinks_;

  std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable idle_cv_;
  std::deque<AlertRecord> queue_;
  bool busy_ = false;
  bool stopping_ = false;

  std::atomic<std::uint64_t> dispatched_{0};
  std::atomic<std::uint64_t> delivered_{0};
  std::atomic<std::uint64_t> errors_{0};
  std::thread worker_;
};

}  // namespace trbac
