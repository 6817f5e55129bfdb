#include "trbac/alert.hpp"

#include "trbac/error.hpp"

namespace trbac {

std::string_view to_string(AlertKind kind) {
  return kind == AlertKind::kMaliciousInsider ? "malicious-insider"
                                              : "unauthorized-attempt";
}

AlertKind alert_kind_from_string(std::string_view s) {
  if (s == "malicious-insider") return AlertKind::kMaliciousInsider;
  if (s == "unauthorized-attempt") return AlertKind::kUnauthorizedAttempt;
  throw Error(ErrorCode::kParseError, "unknown alert kind '" + std::string(s) + "'");
}

}  // namespace trbac
