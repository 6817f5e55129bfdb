#include "trbac/alert_sink.hpp"

#include <stdexcept>

#include "trbac/persistence.hpp"

namespace trbac {

LogAlertSink::LogAlertSink(std::filesystem::path path)
    : path_(std::move(path)) {}

void LogAlertSink::deliver(const AlertRecord& record) {
  std::lock_guard lock(mu_);
  append_line(path_, to_json(record).dump());
}

std::vector<AlertRecord> LogAlertSink::history() const {
  std::lock_guard lock(mu_);
  std::vector<AlertRecord> out;
  for (const std::string& line : read_lines(path_)) {
    out.push_back(alert_from_json(Json::parse(line)));
  }
  return out;
}

MailAlertSink::MailAlertSink(std::string address, MailTransport transport,
                             int max_attempts)
    : address_(std::move(address)),
      transport_(std::move(transport)),
      max_attempts_(max_attempts < 1 ? 1 : max_attempts) {}

void MailAlertSink::deliver(const AlertRecord& record) {
  MailMessage msg;
  msg.to = address_;
  msg.subject = "[trbac-gate] " + std::string(to_string(record.kind)) +
                " for tenant " + record.tenant.str();
  msg.body = to_json(record).dump(2);

  bool sent = false;
  for (int attempt = 0; attempt < max_attempts_ && !sent; ++attempt) {
    sent = !transport_ || transport_(msg);
  }
  if (!sent) {
    throw Error(ErrorCode::kIoError, "mail delivery to " + address_ + " failed");
  }
  std::lock_guard lock(mu_);
  sent_.push_back(record);
  outbox_.push_back(std::move(msg));
}

std::vector<AlertRecord> MailAlertSink::history() const {
  std::lock_guard lock(mu_);
  return sent_;
}

std::vector<MailMessage> MailAlertSink::outbox() const {
  std::lock_guard lock(mu_);
  return outbox_;
}

AlertDispatcher::AlertDispatcher(SinkResolver resolver)
    : resolver_(std::move(resolver)), worker_([this] { run(); }) {}

AlertDispatcher::~AlertDispatcher() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  work_cv_.notify_all();
  worker_.join();
}

std::shared_ptr<AlertSink> AlertDispatcher::sink_for(const TenantId& tenant) {
  std::lock_guard lock(sinks_mu_);
  auto it = sinks_.find(tenant);
  if (it != sinks_.end()) return it->second;
  auto sink = resolver_ ? resolver_(tenant) : nullptr;
  sinks_.emplace(tenant, sink);
  return sink;
}

DeliveryReceipt AlertDispatcher::dispatch(const AlertRecord& record) {
  std::uint64_t seq = 0;
  {
    std::lock_guard lock(mu_);
    seq = ++dispatched_;
    queue_.push_back(record);
  }
  work_cv_.notify_one();
  return {record.tenant, seq};
}

void AlertDispatcher::flush() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

// A single worker drains one FIFO, which keeps per-tenant order.
void AlertDispatcher::run() {
  std::unique_lock lock(mu_);
  while (true) {
    work_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (queue_.empty() && stopping_) break;
    AlertRecord record = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    try {
      auto sink = sink_for(record.tenant);
      if (!sink) throw std::runtime_error("no sink");
      sink->deliver(record);
      ++delivered_;
    } catch (...) {
      ++errors_;
    }
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
  busy_ = false;
  idle_cv_.notify_all();
}

}  // namespace trbac
