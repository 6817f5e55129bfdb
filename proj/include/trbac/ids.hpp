#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>
#include <utility>

namespace trbac {

/// Opaque string identifier tagged by the namespace it lives in, so a
/// RoleId can never be passed where a TaskId is expected.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}
  explicit Id(const char* value) : value_(value) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

 private:
  std::string value_;
};

using TenantId = Id<struct TenantTag>;
using UserId = Id<struct UserTag>;
using RoleId = Id<struct RoleTag>;
using TaskId = Id<struct TaskTag>;
using ObjectId = Id<struct ObjectTag>;
using LocationId = Id<struct LocationTag>;
using ProcessId = Id<struct ProcessTag>;
using ProcessInstanceId = Id<struct ProcessInstanceTag>;
using InstanceId = Id<struct InstanceTag>;

/// Non-empty, no whitespace, no path separators.
inline bool is_valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (unsigned char c : s) {
    if (c <= 0x20 || c == 0x7f || c == '/' || c == '\\') return false;
  }
  return true;
}

}  // namespace trbac

template <class Tag>
struct std::hash<trbac::Id<Tag>> {
  std::size_t operator()(const trbac::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
