#include "trbac/error.hpp"

namespace trbac {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownUser: return "unknown-user";
    case ErrorCode::kUnknownRole: return "unknown-role";
    case ErrorCode::kUnknownTenant: return "unknown-tenant";
    case ErrorCode::kDirectoryMismatch: return "directory-mismatch";
    case ErrorCode::kAlreadyRegistered: return "already-registered";
    case ErrorCode::kWeakPassword: return "weak-password";
    case ErrorCode::kPendingExpired: return "pending-expired";
    case ErrorCode::kBadCredentials: return "bad-credentials";
    case ErrorCode::kAccountNotActivated: return "account-not-activated";
    case ErrorCode::kLocationForbidden: return "location-forbidden";
    case ErrorCode::kSessionExpired: return "session-expired";
    case ErrorCode::kNoRoleTaskMapping: return "no-role-task-mapping";
    case ErrorCode::kSodViolation: return "sod-violation";
    case ErrorCode::kNotHolder: return "not-holder";
    case ErrorCode::kTaskNotActive: return "task-not-active";
    case ErrorCode::kNotSuperior: return "not-superior";
    case ErrorCode::kUnknownInstance: return "unknown-instance";
    case ErrorCode::kIoError: return "io-error";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kValidationFailed: return "validation-failed";
    case ErrorCode::kFormatVersion: return "format-version";
    case ErrorCode::kDimsOutOfRange: return "dims-out-of-range";
  }
  return "unknown";
}

}  // namespace trbac
