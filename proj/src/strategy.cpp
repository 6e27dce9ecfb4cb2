#include "chipfire/strategy.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace chipfire {

Strategy::Strategy(std::string name, RunFactory factory)
    : name_(std::move(name)), factory_(std::move(factory)) {}

std::unique_ptr<StrategyRun> Strategy::begin_run(const TreeParams& p) const {
  return factory_(p);
}

namespace {

int64_t pow_i64(int64_t base, int exp) {
  int64_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

// Tuples as 0-based ranks into a vertex's full sorted chip set of size m*k.
using RankPattern = std::vector<std::vector<int64_t>> (*)(int64_t m, int k);

std::vector<std::vector<int64_t>> bundle_ranks(int64_t m, int k) {
  std::vector<std::vector<int64_t>> tuples;
  tuples.reserve(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) {
    std::vector<int64_t> t(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) t[static_cast<size_t>(i)] = j + i * m;
    tuples.push_back(std::move(t));
  }
  return tuples;
}

std::vector<std::vector<int64_t>> unbundle_ranks(int64_t m, int k) {
  std::vector<std::vector<int64_t>> tuples;
  tuples.reserve(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) {
    std::vector<int64_t> t(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) t[static_cast<size_t>(i)] = j * k + i;
    tuples.push_back(std::move(t));
  }
  return tuples;
}

// Fires a fixed rank pattern over each vertex's full chip set. The plan is
// laid out the first time a vertex is seen, which under layer-synchronous
// stabilization is exactly when it holds everything it will ever hold.
class RankPatternRun : public StrategyRun {
 public:
  RankPatternRun(RankPattern pattern, int k) : pattern_(pattern), k_(k) {}

  std::vector<ChipLabel> next_tuple(VertexId v,
                                    std::span<const ChipLabel> chips) override {
    auto [it, fresh] = plans_.try_emplace(v);
    auto& plan = it->second;
    if (fresh) {
      if (chips.size() % static_cast<size_t>(k_) != 0) {
        throw std::invalid_argument("chip count at vertex is not a multiple of k");
      }
      auto m = static_cast<int64_t>(chips.size()) / k_;
      for (const auto& ranks : pattern_(m, k_)) {
        std::vector<ChipLabel> tuple(ranks.size());
        for (size_t i = 0; i < ranks.size(); ++i) {
          tuple[i] = chips[static_cast<size_t>(ranks[i])];
        }
        plan.push_back(std::move(tuple));
      }
    }
    if (plan.empty()) {
      throw std::logic_error("vertex revisited after its plan was exhausted");
    }
    auto tuple = std::move(plan.front());
    plan.pop_front();
    return tuple;
  }

 private:
  RankPattern pattern_;
  int k_;
  std::map<VertexId, std::deque<std::vector<ChipLabel>>> plans_;
};

uint64_t bounded_draw(std::mt19937_64& rng, uint64_t n) {
  // Rejection sampling; std::uniform_int_distribution is not portable.
  uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

class RandomRun : public StrategyRun {
 public:
  RandomRun(uint64_t seed, int k) : rng_(seed), k_(k) {}

  std::vector<ChipLabel> next_tuple(VertexId /*v*/,
                                    std::span<const ChipLabel> chips) override {
    auto n = chips.size();
    if (n < static_cast<size_t>(k_)) {
      throw std::invalid_argument("fewer than k chips at vertex");
    }
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::vector<ChipLabel> tuple(static_cast<size_t>(k_));
    for (int i = 0; i < k_; ++i) {
      size_t j = static_cast<size_t>(i) + bounded_draw(rng_, n - static_cast<size_t>(i));
      std::swap(idx[static_cast<size_t>(i)], idx[j]);
      tuple[static_cast<size_t>(i)] = chips[idx[static_cast<size_t>(i)]];
    }
    std::sort(tuple.begin(), tuple.end());
    return tuple;
  }

 private:
  std::mt19937_64 rng_;
  int k_;
};

enum class LiftGrouping {
  stride,  // chip groups are residue classes: group j = {j, j+g, j+2g, ...}
  block,   // chip groups are consecutive ranges of k^n values
};

// Plays `top`'s k^n-chip game on the first n layers, expanded through the
// chosen grouping: every group is order-isomorphic to 1..k^n and follows
// the same virtual game, so one virtual firing becomes g real firings. At
// a vertex holding s*g chips whose virtual set has size s, the sorted real
// chips interleave the groups; virtual rank q maps to real ranks
//   stride: (q-1)*g + j      block: j*s + (q-1)       for j = 0..g-1.
// Below layer n+1 each subtree is handed to its own strategy, addressed by
// local vertex ids as if the subtree root were vertex 1.
class CompositeRun : public StrategyRun {
 public:
  CompositeRun(const TreeParams& real, int top_levels, const Strategy& top,
               std::vector<Strategy> children, LiftGrouping grouping)
      : real_(real),
        n_(top_levels),
        grouping_(grouping),
        sub_params_(real.k(), real.ell() - top_levels),
        children_(std::move(children)) {
    if (n_ < 0 || n_ > real_.ell()) {
      throw std::invalid_argument("compose levels must lie in 0..ell");
    }
    if (static_cast<int64_t>(children_.size()) != pow_i64(real_.k(), n_)) {
      throw std::invalid_argument("compose needs exactly k^n child strategies");
    }
    child_runs_.resize(children_.size());
    if (n_ > 0) {
      virtual_params_.emplace(real_.k(), n_);
      top_run_ = top.begin_run(*virtual_params_);
      std::vector<ChipLabel> all(static_cast<size_t>(virtual_params_->num_chips()));
      std::iota(all.begin(), all.end(), 1);
      virtual_at_.emplace(1, std::move(all));
    }
  }

  std::vector<ChipLabel> next_tuple(VertexId v,
                                    std::span<const ChipLabel> chips) override {
    if (layer_of(v, real_) <= n_) {
      auto [it, fresh] = plans_.try_emplace(v);
      if (fresh) build_plan(v, chips, it->second);
      auto& plan = it->second;
      if (plan.empty()) {
        throw std::logic_error("vertex revisited after its plan was exhausted");
      }
      auto tuple = std::move(plan.front());
      plan.pop_front();
      return tuple;
    }
    auto [index, local] = locate(v);
    auto& run = child_runs_[index];
    if (!run) run = children_[index].begin_run(sub_params_);
    return run->next_tuple(local, chips);
  }

 private:
  void build_plan(VertexId v, std::span<const ChipLabel> chips,
                  std::deque<std::vector<ChipLabel>>& plan) {
    auto node = virtual_at_.find(v);
    if (node == virtual_at_.end()) {
      throw std::logic_error("vertex fired before its parent finished");
    }
    std::vector<ChipLabel> full = std::move(node->second);
    virtual_at_.erase(node);
    std::sort(full.begin(), full.end());

    const auto s = static_cast<int64_t>(full.size());
    if (s == 0 || static_cast<int64_t>(chips.size()) % s != 0) {
      throw std::logic_error("real chip count is not a multiple of the virtual set");
    }
    const int64_t g = static_cast<int64_t>(chips.size()) / s;
    const int k = real_.k();

    std::vector<ChipLabel> current = full;
    for (int64_t round = 0; round < s / k; ++round) {
      auto vt = top_run_->next_tuple(v, current);
      if (static_cast<int>(vt.size()) != k) {
        throw std::invalid_argument("strategy returned a tuple of the wrong size");
      }
      std::vector<int64_t> ranks(vt.size());
      for (size_t i = 0; i < vt.size(); ++i) {
        if (i > 0 && vt[i - 1] >= vt[i]) {
          throw std::invalid_argument("strategy tuple not strictly increasing");
        }
        auto pos = std::lower_bound(full.begin(), full.end(), vt[i]);
        if (pos == full.end() || *pos != vt[i] ||
            !std::binary_search(current.begin(), current.end(), vt[i])) {
          throw std::invalid_argument("strategy tuple uses a chip not at the vertex");
        }
        ranks[i] = pos - full.begin();
      }
      for (int64_t j = 0; j < g; ++j) {
        std::vector<ChipLabel> tuple(vt.size());
        for (size_t i = 0; i < ranks.size(); ++i) {
          int64_t r = grouping_ == LiftGrouping::stride ? ranks[i] * g + j
                                                        : j * s + ranks[i];
          tuple[i] = chips[static_cast<size_t>(r)];
        }
        plan.push_back(std::move(tuple));
      }
      if (layer_of(v, real_) < n_) {
        for (int i = 0; i < k; ++i) {
          virtual_at_[child(v, i + 1, real_)].push_back(vt[static_cast<size_t>(i)]);
        }
      }
      for (ChipLabel c : vt) {
        current.erase(std::lower_bound(current.begin(), current.end(), c));
      }
    }
  }

  // Subtree index (0-based) on layer n_+1 and the vertex id `v` maps to
  // when that subtree is addressed as its own tree.
  std::pair<size_t, VertexId> locate(VertexId v) {
    auto memo = locate_memo_.find(v);
    if (memo != locate_memo_.end()) return memo->second;

    std::vector<int> slots;
    VertexId a = v;
    while (layer_of(a, real_) > n_ + 1) {
      slots.push_back(child_slot(a, real_));
      a = *parent(a, real_);
    }
    auto index = static_cast<size_t>(a - real_.layer_first(n_ + 1));
    VertexId local = 1;
    for (auto it = slots.rbegin(); it != slots.rend(); ++it) {
      local = child(local, *it, sub_params_);
    }
    auto result = std::make_pair(index, local);
    locate_memo_.emplace(v, result);
    return result;
  }

  TreeParams real_;
  int n_;
  LiftGrouping grouping_;
  std::optional<TreeParams> virtual_params_;
  TreeParams sub_params_;
  std::vector<Strategy> children_;
  std::unique_ptr<StrategyRun> top_run_;
  std::vector<std::unique_ptr<StrategyRun>> child_runs_;
  std::map<VertexId, std::vector<ChipLabel>> virtual_at_;
  std::map<VertexId, std::deque<std::vector<ChipLabel>>> plans_;
  std::map<VertexId, std::pair<size_t, VertexId>> locate_memo_;
};

}  // namespace

Strategy identity_strategy() {
  return Strategy("identity", [](const TreeParams& p) {
    return std::make_unique<RankPatternRun>(&bundle_ranks, p.k());
  });
}

Strategy unbundle_strategy() {
  return Strategy("unbundle", [](const TreeParams& p) {
    return std::make_unique<RankPatternRun>(&unbundle_ranks, p.k());
  });
}

Strategy random_strategy(uint64_t seed) {
  return Strategy("random:" + std::to_string(seed), [seed](const TreeParams& p) {
    return std::make_unique<RandomRun>(seed, p.k());
  });
}

Strategy compose(int root_levels, Strategy top, std::vector<Strategy> children) {
  std::ostringstream name;
  name << "compose(" << root_levels << ";" << top.name() << ";[";
  for (size_t i = 0; i < children.size(); ++i) {
    if (i > 0) name << ',';
    name << children[i].name();
  }
  name << "])";
  return Strategy(name.str(),
                  [root_levels, top = std::move(top),
                   children = std::move(children)](const TreeParams& p) {
                    return std::make_unique<CompositeRun>(
                        p, root_levels, top, children, LiftGrouping::stride);
                  });
}

PatternEmbedding pattern_embedding_strategy(const std::vector<int>& pattern) {
  const auto len = static_cast<int64_t>(pattern.size());
  if (len == 0) throw std::invalid_argument("pattern cannot be empty");
  {
    std::vector<char> seen(pattern.size() + 1, 0);
    for (int x : pattern) {
      if (x < 1 || x > len || seen[static_cast<size_t>(x)]) {
        throw std::invalid_argument("pattern is not a permutation of 1..n");
      }
      seen[static_cast<size_t>(x)] = 1;
    }
  }

  std::vector<ChipLabel> witness(pattern.size());
  for (size_t i = 0; i < pattern.size(); ++i) {
    witness[i] = static_cast<ChipLabel>(static_cast<int64_t>(i) + 1 +
                                        (pattern[i] - 1) * len);
  }

  std::ostringstream name;
  name << "embed:";
  for (size_t i = 0; i < pattern.size(); ++i) {
    if (i > 0) name << ',';
    name << pattern[i];
  }

  Strategy strategy(name.str(), [len](const TreeParams& p) {
    int n = 0;
    int64_t power = 1;
    while (power < len) {
      power *= p.k();
      ++n;
    }
    if (power != len) {
      throw std::invalid_argument("pattern length is not a power of k");
    }
    if (p.ell() != 2 * n) {
      throw std::invalid_argument("pattern embedding needs ell = 2n chips layers");
    }
    std::vector<Strategy> below(static_cast<size_t>(power), unbundle_strategy());
    return std::make_unique<CompositeRun>(p, n, identity_strategy(),
                                          std::move(below), LiftGrouping::block);
  });
  return PatternEmbedding{std::move(strategy), std::move(witness)};
}

std::vector<int64_t> witness_positions(const StablePermutation& sp,
                                       std::span<const ChipLabel> chips) {
  const auto& seq = sp.seq();
  std::vector<int64_t> pos_of(seq.size() + 1, 0);
  for (size_t i = 0; i < seq.size(); ++i) {
    pos_of[static_cast<size_t>(seq[i])] = static_cast<int64_t>(i) + 1;
  }
  std::vector<int64_t> out;
  out.reserve(chips.size());
  for (ChipLabel c : chips) {
    if (c < 1 || static_cast<size_t>(c) >= pos_of.size()) {
      throw std::invalid_argument("chip label out of range");
    }
    out.push_back(pos_of[static_cast<size_t>(c)]);
  }
  return out;
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "identity") return identity_strategy();
  if (name == "unbundle") return unbundle_strategy();
  if (name.rfind("random:", 0) == 0) {
    const std::string digits = name.substr(7);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("random strategy needs a nonnegative integer seed");
    }
    return random_strategy(std::stoull(digits));
  }
  throw std::invalid_argument("unknown strategy: " + name);
}

namespace {

struct SpecLine {
  int indent;
  std::string text;
};

Strategy parse_spec_node(const std::vector<SpecLine>& lines, size_t& pos, int k) {
  if (pos >= lines.size()) {
    throw std::invalid_argument("compose spec ended unexpectedly");
  }
  const SpecLine line = lines[pos++];
  if (line.text.rfind("compose", 0) != 0) return strategy_from_name(line.text);

  std::istringstream in(line.text.substr(7));
  int n = -1;
  in >> n;
  if (n < 0) throw std::invalid_argument("compose needs a nonnegative level count");

  int64_t want = 1;
  for (int i = 0; i < n; ++i) want *= k;

  if (pos >= lines.size() || lines[pos].indent <= line.indent) {
    throw std::invalid_argument("compose node has no children");
  }
  const int child_indent = lines[pos].indent;

  std::vector<Strategy> nodes;
  while (pos < lines.size() && lines[pos].indent > line.indent) {
    if (lines[pos].indent != child_indent) {
      throw std::invalid_argument("inconsistent indentation in compose spec");
    }
    nodes.push_back(parse_spec_node(lines, pos, k));
  }
  if (static_cast<int64_t>(nodes.size()) != want + 1) {
    throw std::invalid_argument("compose node needs 1 + k^n children");
  }
  Strategy top = std::move(nodes.front());
  nodes.erase(nodes.begin());
  return compose(n, std::move(top), std::move(nodes));
}

}  // namespace

Strategy parse_compose_spec(const std::string& text, int k) {
  std::vector<SpecLine> lines;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    size_t first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;
    if (raw.find('\t') != std::string::npos) {
      throw std::invalid_argument("compose spec must be indented with spaces");
    }
    size_t last = raw.find_last_not_of(" \r");
    lines.push_back(SpecLine{static_cast<int>(first),
                             raw.substr(first, last - first + 1)});
  }
  if (lines.empty()) throw std::invalid_argument("compose spec is empty");
  size_t pos = 0;
  Strategy s = parse_spec_node(lines, pos, k);
  if (pos != lines.size()) {
    throw std::invalid_argument("trailing content in compose spec");
  }
  return s;
}

}  // namespace chipfire
