#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chipfire/combinatorics.hpp"
#include "chipfire/tree.hpp"

namespace chipfire {

/// Raised when an enumeration would exceed the configured size cap.
struct SizeGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GuardOptions {
  BigCount cap = 10'000'000;
  bool force = false;
};

/// Throws SizeGuardError when kappa(k, ell) exceeds the cap and force is
/// not set.
void ensure_size_guard(const TreeParams& p, const GuardOptions& guard);

/// Streams every distinct stable permutation exactly once, in canonical
/// order: depth-first over the lexicographic ballot-walk choices at each
/// internal vertex, deepest-rightmost vertex varying fastest. Stops early
/// when the visitor returns false. Returns the number visited.
uint64_t for_each_stable(const TreeParams& p,
                         const std::function<bool(std::span<const ChipLabel>)>& visit);

/// Total count of distinct stable permutations by exhaustive enumeration,
/// split across `workers` threads on the root's walk choices.
uint64_t count_stable(const TreeParams& p, int workers = 1,
                      const GuardOptions& guard = {});

/// Materialized canonical enumeration, optionally truncated to `limit`.
std::vector<StablePermutation> list_stable(const TreeParams& p, int workers = 1,
                                           std::optional<uint64_t> limit = std::nullopt,
                                           const GuardOptions& guard = {});

struct ExtremalReport {
  std::string statistic;
  BigCount value;
  StablePermutation witness;
  BigCount closed_form;
  uint64_t explored = 0;
  uint64_t pruned = 0;
};

/// Maximum inversion count over the full enumeration. The closed form in
/// the report is (k^(2l) - l*k^(l+1) + (l-1)*k^l)/4; the witness is the
/// first maximizer in canonical order.
ExtremalReport max_inversions_search(const TreeParams& p, int workers = 1,
                                     const GuardOptions& guard = {});

/// Maximum longest-decreasing-subsequence length over the full
/// enumeration (the value D_k(ell)). Branch-and-bound prunes a partial
/// assembly when the prefix LDS plus per-subtree maxima cannot beat the
/// incumbent, which starts at lds(digit_reversal) so results and counts
/// are schedule-independent. The closed form reported is the
/// digit-reversal LDS.
ExtremalReport max_lds_search(const TreeParams& p, int workers = 1,
                              bool prune = true, const GuardOptions& guard = {});

struct ConjectureReport {
  int k = 0;
  int ell = 0;
  int64_t d_value = 0;        // max LDS over all stable configurations
  int64_t z_value = 0;        // LDS of the digit-reversal permutation
  bool consistent = false;    // d_value <= z_value
  StablePermutation witness;  // a configuration attaining d_value
  std::optional<FiringPlan> violation_plan;  // reconstruction when violated
  uint64_t explored = 0;
  uint64_t pruned = 0;
};

/// Compares the searched maximum LDS against the digit-reversal LDS. A
/// violation is reported, not thrown, and carries a replayable firing
/// plan reaching the witness.
ConjectureReport verify_conjecture(const TreeParams& p, int workers = 1,
                                   const GuardOptions& guard = {});

struct FuzzEscape {
  uint64_t trial = 0;
  std::vector<ChipLabel> perm;
  FiringPlan plan;
};

struct FuzzReport {
  uint64_t trials = 0;
  uint64_t seed = 0;
  uint64_t escapes = 0;
  std::optional<FuzzEscape> first_escape;
};

/// Runs `trials` randomized games (alternating layer-synchronous random
/// strategies with fully interleaved random firing orders) and checks
/// every result against the enumerated stable set.
FuzzReport reachability_fuzz(const TreeParams& p, uint64_t trials, uint64_t seed,
                             const GuardOptions& guard = {});

/// Layer-synchronous firing plan that reaches the given stable
/// permutation from the initial configuration. Throws
/// std::invalid_argument when the permutation is not reachable.
FiringPlan plan_for_permutation(const TreeParams& p, const StablePermutation& sp);

}  // namespace chipfire
