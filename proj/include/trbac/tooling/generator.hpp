#pragma once

#include <cstdint>

#include "trbac/policy.hpp"

namespace trbac::tooling {

/// Size of a generated policy. Upper bounds keep full access-matrix
/// expansion tractable for the oracle.
struct PolicyDims {
  int users = 5;
  int roles = 4;
  int tasks = 6;
  int locations = 3;
  int sod_constraints = 2;

  static constexpr int kMaxUsers = 5;
  static constexpr int kMaxRoles = 4;
  static constexpr int kMaxTasks = 6;
  static constexpr int kMaxLocations = 3;
  static constexpr int kMaxSod = 2;
};

inline const TenantId kSimTenant{"t0"};

/// Deterministic per seed; the result always passes validate_policy.
/// Throws Error(kDimsOutOfRange).
PolicyStore generate_policy(std::uint64_t seed, const PolicyDims& dims = {});

}  // namespace trbac::tooling
