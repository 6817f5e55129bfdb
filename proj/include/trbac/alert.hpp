#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "trbac/clock.hpp"
#include "trbac/ids.hpp"

namespace trbac {

namespace endpoint {
inline constexpr std::string_view kRegister = "/v1/register";
inline constexpr std::string_view kPassword = "/v1/password";
inline constexpr std::string_view kLogin = "/v1/login";
inline constexpr std::string_view kActivate = "/v1/tasks/activate";
inline constexpr std::string_view kAccess = "/v1/access";
inline constexpr std::string_view kComplete = "/v1/tasks/complete";
inline constexpr std::string_view kDelegate = "/v1/tasks/delegate";
inline constexpr std::string_view kAlerts = "/v1/alerts";
}  // namespace endpoint

enum class AlertKind {
  kUnauthorizedAttempt,  // unauthenticated failure
  kMaliciousInsider,     // authenticated user denied
};

std::string_view to_string(AlertKind kind);
AlertKind alert_kind_from_string(std::string_view s);

struct AlertRecord {
  TenantId tenant;
  AlertKind kind = AlertKind::kUnauthorizedAttempt;
  // Claimed identity fields as supplied by (or resolved for) the actor.
  std::map<std::string, std::string> actor;
  std::string reason;
  std::string endpoint;
  TimePoint timestamp{};

  friend bool operator==(const AlertRecord&, const AlertRecord&) = default;
};

using AlertEmitter = std::function<void(const AlertRecord&)>;

}  // namespace trbac
