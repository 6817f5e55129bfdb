#pragma once

#include <memory>
#include <mutex>

#include "trbac/policy.hpp"

namespace trbac {

/// Shared, swappable reference to an immutable policy snapshot. Readers
/// keep whatever snapshot they fetched for the duration of one operation.
class PolicyHandle {
 public:
  explicit PolicyHandle(PolicyStore store)
      : current_(std::make_shared<const PolicyStore>(std::move(store))) {}

  std::shared_ptr<const PolicyStore> get() const {
    std::lock_guard lock(mu_);
    return current_;
  }

  void set(PolicyStore store) {
    auto next = std::make_shared<const PolicyStore>(std::move(store));
    std::lock_guard lock(mu_);
    current_ = std::move(next);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const PolicyStore> current_;
};

}  // namespace trbac
