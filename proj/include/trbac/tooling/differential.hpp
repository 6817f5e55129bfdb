#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "trbac/clock.hpp"
#include "trbac/policy.hpp"
#include "trbac/tooling/generator.hpp"

namespace trbac::tooling {

/// One abstract operation. Indices are resolved modulo the live sessions /
/// instances at replay time, so any subsequence is still replayable.
struct SimOp {
  enum class Kind { kLogin, kActivate, kAccess, kComplete, kDelegate, kAdvance };
  Kind kind = Kind::kAdvance;
  int a = 0;
  int b = 0;
  int c = 0;

  friend bool operator==(const SimOp&, const SimOp&) = default;
};

std::string describe(const SimOp& op);

std::vector<SimOp> generate_ops(std::uint64_t seed, std::size_t steps);

struct Divergence {
  std::size_t step = 0;
  std::string op;
  std::string engine;
  std::string oracle;
};

struct DivergenceReport {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::vector<Divergence> divergences;
  // Shrunk failing sequence for the first divergence; empty if none.
  std::vector<SimOp> minimal_failing;
  // Totals from the full run.
  std::size_t permits = 0;
  std::size_t denies = 0;
  std::size_t alerts = 0;
  std::size_t activations = 0;
  std::size_t delegations = 0;
  std::size_t completions = 0;
  std::size_t sod_safety_violations = 0;
  std::size_t usage_bound_violations = 0;
  std::size_t oracle_matrix_entries = 0;
  // "<op>:<outcome>" -> count, engine side.
  std::map<std::string, std::size_t> outcomes;

  bool clean() const {
    return divergences.empty() && sod_safety_violations == 0 &&
           usage_bound_violations == 0;
  }
};

nlohmann::json to_json(const DivergenceReport& report);

struct DifferentialOptions {
  PolicyDims dims;
  Duration session_ttl = std::chrono::minutes(30);
  // Applied to the policy the engine sees (the oracle keeps the original);
  // used for mutation testing.
  std::function<PolicyStore(PolicyStore)> engine_policy_mutator;
  bool shrink = true;
};

/// Replays `ops` against both the engine and the oracle.
DivergenceReport replay(const PolicyStore& policy, const std::vector<SimOp>& ops,
                        const DifferentialOptions& options = {});

/// Greedy removal: the result still diverges and is never longer than `ops`.
std::vector<SimOp> shrink(const PolicyStore& policy, std::vector<SimOp> ops,
                          const DifferentialOptions& options = {});

/// Generates a policy and an operation sequence for `seed` and replays it.
DivergenceReport run_differential(std::uint64_t seed, std::size_t steps,
                                  const DifferentialOptions& options = {});

}  // namespace trbac::tooling
