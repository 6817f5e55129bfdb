#pragma once

#include <set>
#include <string>
#include <vector>

#include "trbac/policy.hpp"

namespace trbac {

/// Assigned roles of `user` plus every role reachable through the juniors
/// relation. Throws Error(kUnknownUser).
std::set<RoleId> resolve_effective_roles(const PolicyStore& store,
                                         const TenantId& tenant,
                                         const UserId& user);

/// Closure over juniors starting from `roles` (the roles themselves
/// included). Terminates on cyclic input.
std::set<RoleId> junior_closure(const PolicyStore& store,
                                const TenantId& tenant,
                                const std::set<RoleId>& roles);

/// Union of granted_tasks over `roles`. Throws Error(kUnknownRole).
std::set<TaskId> permitted_tasks(const PolicyStore& store,
                                 const TenantId& tenant,
                                 const std::set<RoleId>& roles);

/// Every permission of every task the user reaches through their roles.
std::set<Permission> reachable_permissions(const PolicyStore& store,
                                           const TenantId& tenant,
                                           const UserId& user);

/// True iff `senior` reaches `junior` through one or more juniors edges.
bool is_strict_senior(const PolicyStore& store, const TenantId& tenant,
                      const RoleId& senior, const RoleId& junior);

enum class DiagnosticKind {
  kInvalidIdentifier,
  kDanglingReference,
  kDuplicateEntry,
  kHierarchyCycle,
  kStaticSodViolation,
  kInvalidUsageLimit,
  kEmptyTaskPermissions,
  kUnknownOperation,
  kInvalidSodConstraint,
  kDirectoryMismatch,
};

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  TenantId tenant;
  // Ids involved, e.g. every role on a cycle.
  std::vector<std::string> subjects;
  std::string message;
};

/// One diagnostic per violated invariant; empty iff the store is valid.
std::vector<Diagnostic> validate_policy(const PolicyStore& store);

}  // namespace trbac
