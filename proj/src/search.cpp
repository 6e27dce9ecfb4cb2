#include "chipfire/search.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "chipfire/strategy.hpp"

namespace chipfire {

namespace {

int64_t pow_i64(int64_t base, int exp) {
  int64_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

constexpr int64_t kNoPrune = std::numeric_limits<int64_t>::max();

// Depth-first generator of all stable permutations. Every internal vertex
// picks a ballot walk (its dispersion); distinct walk assignments give
// distinct results, so no deduplication is needed. Internal vertices are
// visited in preorder with the deepest-rightmost walk varying fastest;
// the root's walk is fixed by the caller, which is the unit the parallel
// drivers split on.
class StableEnumerator {
 public:
  explicit StableEnumerator(const TreeParams& p) : p_(p) {
    buf_.resize(static_cast<size_t>(p.num_chips()));
    if (p.ell() == 0) {
      buf_[0] = 1;
      return;
    }
    walks_by_layer_.resize(static_cast<size_t>(p.ell()) + 1);
    for (int t = 1; t <= p.ell(); ++t) {
      int64_t m = pow_i64(p.k(), p.ell() - t);
      auto& list = walks_by_layer_[static_cast<size_t>(t)];
      for_each_ballot_walk(p.k(), m, [&](const BallotWalk& w) {
        list.push_back(w.steps);
        return true;
      });
    }
    std::vector<std::pair<int, int>> path;
    build(1, 1, 0, path);
    chipsets_.resize(nodes_.size());
    for (auto& n : nodes_) {
      chipsets_[static_cast<size_t>(&n - nodes_.data())].reserve(
          static_cast<size_t>(n.span));
    }
    chipsets_[0].resize(static_cast<size_t>(p.num_chips()));
    std::iota(chipsets_[0].begin(), chipsets_[0].end(), 1);
  }

  size_t root_walks() const {
    return p_.ell() == 0 ? 1 : walks_by_layer_[1].size();
  }

  size_t node_count() const { return nodes_.size(); }
  int node_layer(size_t idx) const { return nodes_[idx].layer; }
  int64_t node_prefix_len(size_t idx) const { return nodes_[idx].offset; }
  const std::vector<std::pair<int, int>>& node_ancestry(size_t idx) const {
    return nodes_[idx].ancestry;
  }

  struct Hooks {
    // Called on every complete assembly; return false to stop everything.
    std::function<bool(std::span<const ChipLabel>, size_t walk, uint64_t ordinal)>
        visit;
    // Called before expanding a non-root internal vertex with the
    // finalized position prefix; return true to skip the branch.
    std::function<bool(size_t node_idx, std::span<const ChipLabel> prefix)> prune;
  };

  struct Result {
    uint64_t emitted = 0;
    uint64_t pruned = 0;
    bool stopped = false;
  };

  // Runs root walks [lo, hi).
  Result run(size_t lo, size_t hi, const Hooks& hooks) {
    Result r;
    if (p_.ell() == 0) {
      if (lo == 0 && hi >= 1) {
        ++r.emitted;
        if (!hooks.visit(buf_, 0, 0)) r.stopped = true;
      }
      return r;
    }
    for (size_t wi = lo; wi < hi; ++wi) {
      walk_ = wi;
      ordinal_ = 0;
      apply_walk(0, walks_by_layer_[1][wi]);
      if (!rec(1, hooks, r)) {
        r.stopped = true;
        break;
      }
    }
    return r;
  }

 private:
  struct Node {
    VertexId v;
    int layer;
    int64_t offset;  // first leaf position of this subtree
    int64_t span;    // chips in this subtree
    std::vector<int64_t> child_ref;  // preorder index, or leaf position
    bool children_are_leaves;
    std::vector<std::pair<int, int>> ancestry;  // (layer, slot) above this node
  };

  size_t build(VertexId v, int layer, int64_t offset,
               std::vector<std::pair<int, int>>& path) {
    size_t idx = nodes_.size();
    Node n;
    n.v = v;
    n.layer = layer;
    n.offset = offset;
    n.span = pow_i64(p_.k(), p_.ell() + 1 - layer);
    n.children_are_leaves = layer == p_.ell();
    n.ancestry = path;
    nodes_.push_back(std::move(n));
    int64_t child_span = nodes_[idx].span / p_.k();
    std::vector<int64_t> refs(static_cast<size_t>(p_.k()));
    for (int j = 1; j <= p_.k(); ++j) {
      int64_t child_offset = offset + (j - 1) * child_span;
      if (layer == p_.ell()) {
        refs[static_cast<size_t>(j) - 1] = child_offset;
      } else {
        path.emplace_back(layer, j);
        refs[static_cast<size_t>(j) - 1] =
            static_cast<int64_t>(build(child(v, j, p_), layer + 1, child_offset, path));
        path.pop_back();
      }
    }
    nodes_[idx].child_ref = std::move(refs);
    return idx;
  }

  void apply_walk(size_t idx, const std::vector<int8_t>& steps) {
    const Node& nd = nodes_[idx];
    const auto& chips = chipsets_[idx];
    if (nd.children_are_leaves) {
      for (size_t i = 0; i < chips.size(); ++i) {
        buf_[static_cast<size_t>(
            nd.child_ref[static_cast<size_t>(steps[i]) - 1])] = chips[i];
      }
      return;
    }
    for (int j = 0; j < p_.k(); ++j) {
      chipsets_[static_cast<size_t>(nd.child_ref[static_cast<size_t>(j)])].clear();
    }
    for (size_t i = 0; i < chips.size(); ++i) {
      chipsets_[static_cast<size_t>(
                    nd.child_ref[static_cast<size_t>(steps[i]) - 1])]
          .push_back(chips[i]);
    }
  }

  bool rec(size_t idx, const Hooks& hooks, Result& r) {
    if (idx == nodes_.size()) {
      ++r.emitted;
      return hooks.visit(buf_, walk_, ordinal_++);
    }
    if (hooks.prune &&
        hooks.prune(idx, std::span(buf_.data(),
                                   static_cast<size_t>(nodes_[idx].offset)))) {
      ++r.pruned;
      return true;
    }
    for (const auto& steps : walks_by_layer_[static_cast<size_t>(nodes_[idx].layer)]) {
      apply_walk(idx, steps);
      if (!rec(idx + 1, hooks, r)) return false;
    }
    return true;
  }

  TreeParams p_;
  std::vector<std::vector<std::vector<int8_t>>> walks_by_layer_;
  std::vector<Node> nodes_;
  std::vector<std::vector<ChipLabel>> chipsets_;
  std::vector<ChipLabel> buf_;
  size_t walk_ = 0;
  uint64_t ordinal_ = 0;
};

int clamp_workers(int workers, size_t units) {
  if (workers < 1) workers = 1;
  return static_cast<int>(
      std::min<size_t>(static_cast<size_t>(workers), std::max<size_t>(units, 1)));
}

struct MaxScanResult {
  bool improved = false;
  uint64_t value = 0;
  size_t walk = 0;
  uint64_t ordinal = 0;
  std::vector<ChipLabel> witness;
  uint64_t emitted = 0;
  uint64_t pruned = 0;
};

// Maximum of `stat` over the enumeration, split on root walks. With a
// floor, only strictly larger values are recorded (the caller supplies
// the floor's witness); without one, the first canonical maximizer is
// recorded. Static chunking plus (walk, ordinal) tie-breaking makes the
// result independent of the worker count.
MaxScanResult scan_max(const TreeParams& p, int workers,
                       const std::function<uint64_t(std::span<const ChipLabel>)>& stat,
                       std::optional<uint64_t> floor_value,
                       std::vector<int64_t> bound_extra, int64_t incumbent) {
  StableEnumerator probe(p);
  const size_t total_walks = probe.root_walks();
  workers = clamp_workers(workers, total_walks);

  std::vector<MaxScanResult> results(static_cast<size_t>(workers));
  auto work = [&](int widx, size_t lo, size_t hi) {
    StableEnumerator en(p);
    MaxScanResult& out = results[static_cast<size_t>(widx)];
    StableEnumerator::Hooks hooks;
    hooks.visit = [&](std::span<const ChipLabel> buf, size_t walk,
                      uint64_t ordinal) {
      uint64_t s = stat(buf);
      bool record;
      if (floor_value) {
        record = s > (out.improved ? out.value : *floor_value);
      } else {
        record = !out.improved || s > out.value;
      }
      if (record) {
        out.improved = true;
        out.value = s;
        out.walk = walk;
        out.ordinal = ordinal;
        out.witness.assign(buf.begin(), buf.end());
      }
      return true;
    };
    if (!bound_extra.empty()) {
      hooks.prune = [&, bound_extra](size_t idx, std::span<const ChipLabel> prefix) {
        int64_t extra = bound_extra[idx];
        if (extra == kNoPrune) return false;
        return static_cast<int64_t>(lds(prefix)) + extra <= incumbent;
      };
    }
    auto r = en.run(lo, hi, hooks);
    out.emitted = r.emitted;
    out.pruned = r.pruned;
  };

  if (workers == 1) {
    work(0, 0, total_walks);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
      size_t lo = total_walks * static_cast<size_t>(w) / static_cast<size_t>(workers);
      size_t hi =
          total_walks * (static_cast<size_t>(w) + 1) / static_cast<size_t>(workers);
      threads.emplace_back(work, w, lo, hi);
    }
    for (auto& t : threads) t.join();
  }

  MaxScanResult best;
  for (auto& r : results) {
    best.emitted += r.emitted;
    best.pruned += r.pruned;
  }
  for (auto& r : results) {
    if (!r.improved) continue;
    bool take = !best.improved || r.value > best.value ||
                (r.value == best.value &&
                 std::pair(r.walk, r.ordinal) < std::pair(best.walk, best.ordinal));
    if (take) {
      best.improved = true;
      best.value = r.value;
      best.walk = r.walk;
      best.ordinal = r.ordinal;
      best.witness = std::move(r.witness);
    }
  }
  return best;
}

// Exact D values for exponents 0..upto, each from a pruned search seeded
// with the digit-reversal lower bound. Only proven smaller-exponent
// maxima feed the pruning bound, never the conjectured closed form.
std::vector<int64_t> exact_lds_table(int k, int upto, int workers);

MaxScanResult lds_scan(const TreeParams& p, int workers, bool prune,
                       const std::vector<int64_t>& d_table, int64_t incumbent) {
  std::vector<int64_t> bound_extra;
  if (prune && p.ell() >= 1) {
    StableEnumerator probe(p);
    bound_extra.resize(probe.node_count(), kNoPrune);
    for (size_t idx = 1; idx < probe.node_count(); ++idx) {
      int t = probe.node_layer(idx);
      int64_t extra = d_table[static_cast<size_t>(p.ell() - t + 1)];
      for (const auto& [alayer, slot] : probe.node_ancestry(idx)) {
        extra += static_cast<int64_t>(p.k() - slot) *
                 d_table[static_cast<size_t>(p.ell() - alayer)];
      }
      bound_extra[idx] = extra;
    }
  }
  return scan_max(
      p, workers,
      [](std::span<const ChipLabel> buf) { return static_cast<uint64_t>(lds(buf)); },
      static_cast<uint64_t>(incumbent), std::move(bound_extra), incumbent);
}

std::vector<int64_t> exact_lds_table(int k, int upto, int workers) {
  std::vector<int64_t> d{1};  // one chip: a single-element sequence
  for (int j = 1; j <= upto; ++j) {
    TreeParams sub(k, j);
    int64_t incumbent = lds(digit_reversal(k, j));
    auto scan = lds_scan(sub, workers, true, d, incumbent);
    d.push_back(scan.improved ? static_cast<int64_t>(scan.value) : incumbent);
  }
  return d;
}

}  // namespace

void ensure_size_guard(const TreeParams& p, const GuardOptions& guard) {
  if (guard.force) return;
  BigCount total = kappa(p.k(), p.ell());
  if (total > guard.cap) {
    std::ostringstream msg;
    msg << "enumeration of " << total << " stable configurations exceeds the cap of "
        << guard.cap << " (force to override)";
    throw SizeGuardError(msg.str());
  }
}

uint64_t for_each_stable(const TreeParams& p,
                         const std::function<bool(std::span<const ChipLabel>)>& visit) {
  StableEnumerator en(p);
  StableEnumerator::Hooks hooks;
  hooks.visit = [&](std::span<const ChipLabel> buf, size_t, uint64_t) {
    return visit(buf);
  };
  return en.run(0, en.root_walks(), hooks).emitted;
}

uint64_t count_stable(const TreeParams& p, int workers, const GuardOptions& guard) {
  ensure_size_guard(p, guard);
  StableEnumerator probe(p);
  const size_t total_walks = probe.root_walks();
  workers = clamp_workers(workers, total_walks);
  if (workers == 1) {
    StableEnumerator en(p);
    StableEnumerator::Hooks hooks;
    hooks.visit = [](std::span<const ChipLabel>, size_t, uint64_t) { return true; };
    return en.run(0, total_walks, hooks).emitted;
  }
  std::vector<uint64_t> counts(static_cast<size_t>(workers), 0);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    size_t lo = total_walks * static_cast<size_t>(w) / static_cast<size_t>(workers);
    size_t hi = total_walks * (static_cast<size_t>(w) + 1) / static_cast<size_t>(workers);
    threads.emplace_back([&, w, lo, hi] {
      StableEnumerator en(p);
      StableEnumerator::Hooks hooks;
      hooks.visit = [](std::span<const ChipLabel>, size_t, uint64_t) { return true; };
      counts[static_cast<size_t>(w)] = en.run(lo, hi, hooks).emitted;
    });
  }
  for (auto& t : threads) t.join();
  return std::accumulate(counts.begin(), counts.end(), uint64_t{0});
}

std::vector<StablePermutation> list_stable(const TreeParams& p, int workers,
                                           std::optional<uint64_t> limit,
                                           const GuardOptions& guard) {
  ensure_size_guard(p, guard);
  StableEnumerator probe(p);
  const size_t total_walks = probe.root_walks();
  workers = clamp_workers(workers, total_walks);

  std::vector<StablePermutation> out;
  // Root walks are processed in rounds of `workers` and appended in walk
  // order, so the list is identical for every worker count.
  for (size_t base = 0; base < total_walks; base += static_cast<size_t>(workers)) {
    size_t round = std::min(static_cast<size_t>(workers), total_walks - base);
    std::vector<std::vector<StablePermutation>> slots(round);
    auto fill = [&](size_t slot) {
      StableEnumerator en(p);
      StableEnumerator::Hooks hooks;
      hooks.visit = [&](std::span<const ChipLabel> buf, size_t, uint64_t) {
        slots[slot].emplace_back(std::vector<ChipLabel>(buf.begin(), buf.end()));
        return true;
      };
      en.run(base + slot, base + slot + 1, hooks);
    };
    if (round == 1) {
      fill(0);
    } else {
      std::vector<std::thread> threads;
      for (size_t s = 0; s < round; ++s) threads.emplace_back(fill, s);
      for (auto& t : threads) t.join();
    }
    for (auto& slot : slots) {
      for (auto& perm : slot) {
        if (limit && out.size() >= *limit) return out;
        out.push_back(std::move(perm));
      }
    }
  }
  return out;
}

ExtremalReport max_inversions_search(const TreeParams& p, int workers,
                                     const GuardOptions& guard) {
  ensure_size_guard(p, guard);
  auto scan = scan_max(
      p, workers,
      [](std::span<const ChipLabel> buf) { return inversions_u64(buf); },
      std::nullopt, {}, 0);
  ExtremalReport report{
      "max-inversions",
      BigCount(scan.value),
      StablePermutation(std::move(scan.witness)),
      max_inversions_closed_form(p.k(), p.ell()),
      scan.emitted,
      scan.pruned,
  };
  return report;
}

ExtremalReport max_lds_search(const TreeParams& p, int workers, bool prune,
                              const GuardOptions& guard) {
  ensure_size_guard(p, guard);
  Permutation z = digit_reversal(p.k(), p.ell());
  int64_t incumbent = lds(z);
  auto d_table = prune && p.ell() >= 1
                     ? exact_lds_table(p.k(), p.ell() - 1, workers)
                     : std::vector<int64_t>{};
  auto scan = lds_scan(p, workers, prune, d_table, incumbent);

  StablePermutation witness =
      scan.improved ? StablePermutation(std::move(scan.witness))
                    : StablePermutation(std::vector<ChipLabel>(z.begin(), z.end()));
  ExtremalReport report{
      "max-lds",
      BigCount(scan.improved ? static_cast<int64_t>(scan.value) : incumbent),
      std::move(witness),
      BigCount(incumbent),
      scan.emitted,
      scan.pruned,
  };
  return report;
}

ConjectureReport verify_conjecture(const TreeParams& p, int workers,
                                   const GuardOptions& guard) {
  if (p.ell() < 1) {
    throw std::invalid_argument("conjecture check needs ell >= 1");
  }
  auto report = max_lds_search(p, workers, true, guard);
  int64_t d_value = report.value.convert_to<int64_t>();
  int64_t z_value = z_lds_closed_form(p.k(), p.ell());
  ConjectureReport out{p.k(),   p.ell(),         d_value,
                       z_value, d_value <= z_value, std::move(report.witness),
                       std::nullopt, report.explored, report.pruned};
  if (!out.consistent) {
    out.violation_plan = plan_for_permutation(p, out.witness);
  }
  return out;
}

namespace {

uint64_t bounded_draw(std::mt19937_64& rng, uint64_t n) {
  uint64_t limit =
      std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Fires random tuples at randomly chosen fireable vertices until stable,
// with no layer discipline at all.
std::pair<StablePermutation, FiringPlan> interleaved_random_game(const TreeParams& p,
                                                                 std::mt19937_64& rng) {
  Configuration c = Configuration::initial(p);
  FiringPlan plan;
  std::vector<VertexId> fireable;
  for (;;) {
    fireable.clear();
    for (int t = 1; t < p.num_layers(); ++t) {
      int64_t first = p.layer_first(t);
      for (int64_t v = first; v < first + p.layer_size(t); ++v) {
        if (c.chip_count(static_cast<VertexId>(v)) >= p.k()) {
          fireable.push_back(static_cast<VertexId>(v));
        }
      }
    }
    if (fireable.empty()) break;
    VertexId v = fireable[bounded_draw(rng, fireable.size())];
    auto chips = c.chips_at(v);
    std::vector<size_t> idx(chips.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::vector<ChipLabel> tuple(static_cast<size_t>(p.k()));
    for (int i = 0; i < p.k(); ++i) {
      size_t j =
          static_cast<size_t>(i) + bounded_draw(rng, chips.size() - static_cast<size_t>(i));
      std::swap(idx[static_cast<size_t>(i)], idx[j]);
      tuple[static_cast<size_t>(i)] = chips[idx[static_cast<size_t>(i)]];
    }
    std::sort(tuple.begin(), tuple.end());
    FiringEvent e{v, std::move(tuple)};
    c.apply_fire(e);
    plan.events.push_back(std::move(e));
  }
  return {read_stable(c), std::move(plan)};
}

}  // namespace

FuzzReport reachability_fuzz(const TreeParams& p, uint64_t trials, uint64_t seed,
                             const GuardOptions& guard) {
  ensure_size_guard(p, guard);
  std::vector<std::vector<ChipLabel>> reachable;
  for_each_stable(p, [&](std::span<const ChipLabel> buf) {
    reachable.emplace_back(buf.begin(), buf.end());
    return true;
  });
  std::sort(reachable.begin(), reachable.end());

  FuzzReport report;
  report.trials = trials;
  report.seed = seed;
  std::mt19937_64 rng(seed);
  Configuration initial = Configuration::initial(p);
  for (uint64_t trial = 0; trial < trials; ++trial) {
    StablePermutation perm({1});
    FiringPlan plan;
    if (trial % 2 == 0) {
      auto outcome = stabilize_full(initial, random_strategy(rng()));
      perm = std::move(outcome.perm);
      plan = std::move(outcome.plan);
    } else {
      auto [ip, iplan] = interleaved_random_game(p, rng);
      perm = std::move(ip);
      plan = std::move(iplan);
    }
    if (!std::binary_search(reachable.begin(), reachable.end(), perm.seq())) {
      ++report.escapes;
      if (!report.first_escape) {
        report.first_escape = FuzzEscape{trial, perm.seq(), std::move(plan)};
      }
    }
  }
  return report;
}

FiringPlan plan_for_permutation(const TreeParams& p, const StablePermutation& sp) {
  if (sp.size() != p.num_chips()) {
    throw std::invalid_argument("permutation length does not match the parameters");
  }
  FiringPlan plan;
  if (p.ell() == 0) return plan;
  const auto& seq = sp.seq();

  std::vector<int64_t> offset(static_cast<size_t>(p.num_vertices()) + 1, 0);
  int64_t last_internal = p.layer_first(p.ell()) + p.layer_size(p.ell()) - 1;
  for (int64_t v = 1; v <= last_internal; ++v) {
    int t = layer_of(static_cast<VertexId>(v), p);
    int64_t child_span = pow_i64(p.k(), p.ell() - t);
    for (int j = 1; j <= p.k(); ++j) {
      offset[static_cast<size_t>(child(static_cast<VertexId>(v), j, p))] =
          offset[static_cast<size_t>(v)] + (j - 1) * child_span;
    }
  }

  for (int64_t v = 1; v <= last_internal; ++v) {
    int t = layer_of(static_cast<VertexId>(v), p);
    int64_t span = pow_i64(p.k(), p.ell() + 1 - t);
    int64_t m = span / p.k();
    std::vector<std::vector<ChipLabel>> sets(static_cast<size_t>(p.k()));
    for (int j = 0; j < p.k(); ++j) {
      auto first = seq.begin() + offset[static_cast<size_t>(v)] + j * m;
      sets[static_cast<size_t>(j)].assign(first, first + m);
      std::sort(sets[static_cast<size_t>(j)].begin(), sets[static_cast<size_t>(j)].end());
    }
    // The induced dispersion, standardized to ranks within this subtree's
    // chips, must satisfy the ballot property; otherwise the permutation
    // is not reachable.
    std::vector<ChipLabel> all(seq.begin() + offset[static_cast<size_t>(v)],
                               seq.begin() + offset[static_cast<size_t>(v)] + span);
    std::sort(all.begin(), all.end());
    Dispersion d{p.k(), m, std::vector<std::vector<int>>(static_cast<size_t>(p.k()))};
    for (int j = 0; j < p.k(); ++j) {
      for (ChipLabel c : sets[static_cast<size_t>(j)]) {
        d.sets[static_cast<size_t>(j)].push_back(static_cast<int>(
            std::lower_bound(all.begin(), all.end(), c) - all.begin() + 1));
      }
    }
    try {
      dispersion_to_walk(d);
    } catch (const std::invalid_argument&) {
      std::ostringstream msg;
      msg << "permutation is not a reachable stable configuration (vertex " << v
          << " would need an invalid dispersion)";
      throw std::invalid_argument(msg.str());
    }
    for (int64_t i = 0; i < m; ++i) {
      std::vector<ChipLabel> tuple(static_cast<size_t>(p.k()));
      for (int j = 0; j < p.k(); ++j) {
        tuple[static_cast<size_t>(j)] = sets[static_cast<size_t>(j)][static_cast<size_t>(i)];
      }
      plan.events.push_back(FiringEvent{static_cast<VertexId>(v), std::move(tuple)});
    }
  }
  return plan;
}

}  // namespace chipfire
