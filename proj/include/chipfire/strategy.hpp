#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chipfire/tree.hpp"

namespace chipfire {

/// Per-stabilization selector state. `next_tuple` is handed the vertex and
/// its current chip list (ascending, size a positive multiple of k) and
/// returns the next k chips to fire there, strictly increasing.
class StrategyRun {
 public:
  virtual ~StrategyRun() = default;
  virtual std::vector<ChipLabel> next_tuple(VertexId v,
                                            std::span<const ChipLabel> chips) = 0;
};

/// A named, immutable tuple-selection policy. Each stabilization gets a
/// fresh run object, so strategies are safe to share across threads and a
/// seeded strategy replays identically from the same seed.
class Strategy {
 public:
  using RunFactory =
      std::function<std::unique_ptr<StrategyRun>(const TreeParams&)>;

  Strategy(std::string name, RunFactory factory);

  const std::string& name() const { return name_; }
  std::unique_ptr<StrategyRun> begin_run(const TreeParams& p) const;

 private:
  std::string name_;
  RunFactory factory_;
};

/// At a vertex holding m*k chips, fires the rank tuples
/// {j, j+m, ..., j+(k-1)m} for j = 1..m, so the c-th child receives the
/// c-th consecutive rank block of size m. Stabilizing with it from the
/// root yields the identity permutation.
Strategy identity_strategy();

/// At a vertex holding m*k chips, fires consecutive rank blocks of k
/// (ranks 1..k, then k+1..2k, ...), so the c-th child receives every k-th
/// chip by rank starting at rank c. Stabilizing with it everywhere yields
/// the radix-k digit-reversal permutation.
Strategy unbundle_strategy();

/// Uniformly random k-subset of the current chips at every step, drawn
/// from mt19937_64 seeded with `seed`. Same seed, same firing plan.
Strategy random_strategy(uint64_t seed);

/// Plays `top` on the first `root_levels` layers through its grouped lift
/// (each residue class of chips mod k^(ell-n) runs `top`'s game as one
/// order-isomorphic copy) and children[i] inside the subtree of the i-th
/// leftmost vertex on layer root_levels+1. The stable result is the
/// inflation of top's k^n-chip stable permutation by the children's
/// k^(ell-n)-chip stable permutations.
Strategy compose(int root_levels, Strategy top, std::vector<Strategy> children);

struct PatternEmbedding {
  Strategy strategy;
  /// Chips i + (P[i]-1)*|P|; their positions in the stable result
  /// standardize to P.
  std::vector<ChipLabel> witness_chips;
};

/// Embeds an arbitrary pattern P of length k^n into the stable result of
/// the k^(2n)-chip game: the consecutive-block lift of the identity
/// strategy on the top n layers leaves vertex p of layer n+1 holding
/// {p, p+k^n, p+2k^n, ...}; unbundling finishes the firings below.
PatternEmbedding pattern_embedding_strategy(const std::vector<int>& pattern);

/// Positions (1-based) of the given chips in a stable permutation, in the
/// order the chips are listed.
std::vector<int64_t> witness_positions(const StablePermutation& sp,
                                       std::span<const ChipLabel> chips);

/// Parses `identity`, `unbundle` or `random:<seed>`.
Strategy strategy_from_name(const std::string& name);

/// Parses the compose spec-file format: a node is a strategy name or a
/// `compose <n>` line followed by 1 + k^n deeper-indented nodes (the top
/// strategy first, then the k^n subtree strategies left to right).
/// Blank lines and lines starting with '#' are ignored.
Strategy parse_compose_spec(const std::string& text, int k);

}  // namespace chipfire
