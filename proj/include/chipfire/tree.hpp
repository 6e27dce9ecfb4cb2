#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chipfire {

using ChipLabel = int;
using VertexId = int;

/// Parameters of one game: branching factor `k` and exponent `ell`.
/// The game starts with k^ell labeled chips on the root of a directed
/// k-ary tree. No chip ever travels past layer ell+1, so only layers
/// 1..ell+1 are modeled; vertices carry the 1-based labels where the
/// j-th leftmost child of vertex i is vertex k*(i-1)+j+1.
class TreeParams {
 public:
  TreeParams(int k, int ell);

  int k() const { return k_; }
  int ell() const { return ell_; }
  int64_t num_chips() const { return num_chips_; }
  int num_layers() const { return ell_ + 1; }
  int64_t num_vertices() const { return num_vertices_; }

  /// First vertex index on layer t (1-based, t in 1..num_layers()).
  int64_t layer_first(int t) const;
  /// Number of vertices on layer t, i.e. k^(t-1).
  int64_t layer_size(int t) const;

  bool operator==(const TreeParams&) const = default;

 private:
  int k_;
  int ell_;
  int64_t num_chips_;
  int64_t num_vertices_;
};

/// Layer of vertex `v` (root is on layer 1).
int layer_of(VertexId v, const TreeParams& p);

/// j-th leftmost child of `v`, 1 <= j <= k. `v` must not be on the last
/// modeled layer.
VertexId child(VertexId v, int j, const TreeParams& p);

/// Parent of `v`, or nullopt for the root. Round-trips with child().
std::optional<VertexId> parent(VertexId v, const TreeParams& p);

/// Which child slot `v` occupies under its parent (1-based).
int child_slot(VertexId v, const TreeParams& p);

/// One firing: `vertex` removes the k chips in `tuple` (strictly
/// increasing) and sends the i-th smallest to its i-th leftmost child.
struct FiringEvent {
  VertexId vertex;
  std::vector<ChipLabel> tuple;

  bool operator==(const FiringEvent&) const = default;
};

/// Assignment of the chips {1..k^ell} to vertices of the truncated tree.
/// Chip lists are kept in ascending order; the lists are pairwise
/// disjoint and together cover exactly {1..k^ell}.
class Configuration {
 public:
  /// All chips on the root, every other vertex empty.
  static Configuration initial(const TreeParams& p);

  /// Build from explicit per-vertex chip lists; validates the invariants.
  static Configuration from_vertex_lists(
      const TreeParams& p,
      const std::vector<std::pair<VertexId, std::vector<ChipLabel>>>& lists);

  const TreeParams& params() const { return params_; }
  std::span<const ChipLabel> chips_at(VertexId v) const;
  int64_t chip_count(VertexId v) const;

  /// Throws std::invalid_argument if the chip sets violate the invariants.
  void validate() const;

  /// Applies one firing in place. Throws on any rule violation: chip
  /// absent, tuple not strictly increasing or not of size k, or vertex on
  /// the truncation layer.
  void apply_fire(const FiringEvent& e);

  /// Text dump: one `v<index>: c1 c2 ...` line per nonempty vertex,
  /// ascending index order.
  std::string dump() const;

  bool operator==(const Configuration&) const = default;

 private:
  explicit Configuration(TreeParams p);

  TreeParams params_;
  std::vector<std::vector<ChipLabel>> chips_;  // index v-1
};

/// Pure firing step: returns the configuration after the event.
Configuration fire(const Configuration& c, const FiringEvent& e);

/// True iff no vertex can fire (every vertex above the last layer holds
/// fewer than k chips). Validates `c` first.
bool is_stable(const Configuration& c);

/// A stable configuration read as the layer-(ell+1) chips left to right.
/// Always a permutation of 1..k^ell that starts with 1 and ends with
/// k^ell.
class StablePermutation {
 public:
  explicit StablePermutation(std::vector<ChipLabel> seq);

  const std::vector<ChipLabel>& seq() const { return seq_; }
  int64_t size() const { return static_cast<int64_t>(seq_.size()); }
  std::string to_string() const;  // space-separated labels

  bool operator==(const StablePermutation&) const = default;

 private:
  std::vector<ChipLabel> seq_;
};

/// Ordered log of the firings of one full stabilization. Replaying it
/// from the initial configuration reproduces the same stable result.
struct FiringPlan {
  std::vector<FiringEvent> events;
};

class Strategy;  // strategy.hpp

struct StabilizeOutcome {
  StablePermutation perm;
  FiringPlan plan;
  std::vector<int64_t> fires_per_vertex;  // index v-1
};

/// Runs `s` to stabilization from an initial configuration, processing
/// vertices layer by layer in ascending index order. Verifies the firing
/// counts (k^(ell-t) per layer-t vertex, ell*k^(ell-1) total) and returns
/// the stable permutation together with the full firing log.
StabilizeOutcome stabilize_full(const Configuration& c, const Strategy& s);
StablePermutation stabilize(const Configuration& c, const Strategy& s);

/// Replays a plan from the initial configuration, validating every event.
StablePermutation replay(const TreeParams& p, const FiringPlan& plan);

/// Reads the stable permutation off a stable configuration; throws if the
/// configuration is not stable.
StablePermutation read_stable(const Configuration& c);

/// Structural property of every reachable stable permutation: for each
/// j in 0..ell and each aligned block of k^j positions, the block minimum
/// sits first and the block maximum last.
bool block_extrema_hold(const StablePermutation& sp, const TreeParams& p);

}  // namespace chipfire
