#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trbac {

enum class ErrorCode {
  // policy-model
  kUnknownUser,
  kUnknownRole,
  kUnknownTenant,
  // authn
  kDirectoryMismatch,
  kAlreadyRegistered,
  kWeakPassword,
  kPendingExpired,
  kBadCredentials,
  kAccountNotActivated,
  kLocationForbidden,
  // authz-engine
  kSessionExpired,
  kNoRoleTaskMapping,
  kSodViolation,
  kNotHolder,
  kTaskNotActive,
  kNotSuperior,
  kUnknownInstance,
  // persistence / tooling
  kIoError,
  kParseError,
  kValidationFailed,
  kFormatVersion,
  kDimsOutOfRange,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  explicit Error(ErrorCode code)
      : std::runtime_error(std::string(to_string(code))), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trbac
