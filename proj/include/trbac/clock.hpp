#pragma once

#include <chrono>
#include <cstdint>
#include <functional>

namespace trbac {

using TimePoint = std::chrono::system_clock::time_point;
using Duration = std::chrono::milliseconds;
using Clock = std::function<TimePoint()>;

inline Clock system_clock() {
  return [] { return std::chrono::system_clock::now(); };
}

inline std::int64_t to_epoch_ms(TimePoint t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             t.time_since_epoch())
      .count();
}

inline TimePoint from_epoch_ms(std::int64_t ms) {
  return TimePoint(std::chrono::milliseconds(ms));
}

/// Manually advanced clock for tests and simulation.
class ManualClock {
 public:
  explicit ManualClock(TimePoint start = from_epoch_ms(1'700'000'000'000))
      : now_(start) {}

  TimePoint now() const { return now_; }
  void advance(Duration d) { now_ += d; }
  void set(TimePoint t) { now_ = t; }

  Clock as_clock() {
    return [this] { return now_; };
  }

 private:
  TimePoint now_;
};

}  // namespace trbac
