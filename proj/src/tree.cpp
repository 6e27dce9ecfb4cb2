#include "chipfire/tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "chipfire/strategy.hpp"

namespace chipfire {

namespace {

int64_t checked_pow(int64_t base, int exp) {
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<int64_t>::max() / base) {
      throw std::invalid_argument("tree parameters overflow 64-bit sizes");
    }
    r *= base;
  }
  return r;
}

}  // namespace

TreeParams::TreeParams(int k, int ell) : k_(k), ell_(ell) {
  if (k == 1) {
    throw std::domain_error(
        "k = 1 is not supported: a single-child tree never stabilizes");
  }
  if (k < 2) throw std::invalid_argument("branching factor must be at least 2");
  if (ell < 0) throw std::invalid_argument("ell must be nonnegative");
  num_chips_ = checked_pow(k, ell);
  num_vertices_ = (checked_pow(k, ell + 1) - 1) / (k - 1);
  if (num_vertices_ > std::numeric_limits<VertexId>::max()) {
    throw std::invalid_argument("tree too large for 32-bit vertex ids");
  }
}

int64_t TreeParams::layer_first(int t) const {
  if (t < 1 || t > num_layers()) throw std::invalid_argument("layer out of range");
  int64_t p = 1;
  for (int i = 1; i < t; ++i) p *= k_;
  return (p - 1) / (k_ - 1) + 1;
}

int64_t TreeParams::layer_size(int t) const {
  if (t < 1 || t > num_layers()) throw std::invalid_argument("layer out of range");
  int64_t p = 1;
  for (int i = 1; i < t; ++i) p *= k_;
  return p;
}

int layer_of(VertexId v, const TreeParams& p) {
  if (v < 1 || v > p.num_vertices()) {
    throw std::invalid_argument("vertex index out of range");
  }
  for (int t = 1; t <= p.num_layers(); ++t) {
    if (v < p.layer_first(t) + p.layer_size(t)) return t;
  }
  throw std::logic_error("unreachable: vertex not on any layer");
}

VertexId child(VertexId v, int j, const TreeParams& p) {
  if (j < 1 || j > p.k()) throw std::invalid_argument("child slot out of range");
  if (layer_of(v, p) == p.num_layers()) {
    throw std::invalid_argument("vertex is on the last modeled layer");
  }
  return static_cast<VertexId>(static_cast<int64_t>(p.k()) * (v - 1) + j + 1);
}

std::optional<VertexId> parent(VertexId v, const TreeParams& p) {
  layer_of(v, p);  // range check
  if (v == 1) return std::nullopt;
  return static_cast<VertexId>((v - 2) / p.k() + 1);
}

int child_slot(VertexId v, const TreeParams& p) {
  auto u = parent(v, p);
  if (!u) throw std::invalid_argument("root has no parent");
  return v - 1 - p.k() * (*u - 1);
}

Configuration::Configuration(TreeParams p)
    : params_(p), chips_(static_cast<size_t>(p.num_vertices())) {}

Configuration Configuration::initial(const TreeParams& p) {
  Configuration c(p);
  c.chips_[0].resize(static_cast<size_t>(p.num_chips()));
  std::iota(c.chips_[0].begin(), c.chips_[0].end(), 1);
  return c;
}

Configuration Configuration::from_vertex_lists(
    const TreeParams& p,
    const std::vector<std::pair<VertexId, std::vector<ChipLabel>>>& lists) {
  Configuration c(p);
  for (const auto& [v, chips] : lists) {
    if (v < 1 || v > p.num_vertices()) {
      throw std::invalid_argument("vertex index out of range");
    }
    auto& slot = c.chips_[static_cast<size_t>(v) - 1];
    if (!slot.empty()) throw std::invalid_argument("duplicate vertex in lists");
    slot = chips;
    std::sort(slot.begin(), slot.end());
  }
  c.validate();
  return c;
}

std::span<const ChipLabel> Configuration::chips_at(VertexId v) const {
  if (v < 1 || v > params_.num_vertices()) {
    throw std::invalid_argument("vertex index out of range");
  }
  return chips_[static_cast<size_t>(v) - 1];
}

int64_t Configuration::chip_count(VertexId v) const {
  return static_cast<int64_t>(chips_at(v).size());
}

void Configuration::validate() const {
  std::vector<char> seen(static_cast<size_t>(params_.num_chips()) + 1, 0);
  int64_t total = 0;
  for (const auto& list : chips_) {
    for (size_t i = 0; i < list.size(); ++i) {
      ChipLabel c = list[i];
      if (c < 1 || c > params_.num_chips()) {
        throw std::invalid_argument("chip label out of range");
      }
      if (i > 0 && list[i - 1] >= c) {
        throw std::invalid_argument("chip list not strictly ascending");
      }
      if (seen[static_cast<size_t>(c)]) {
        throw std::invalid_argument("chip appears at two vertices");
      }
      seen[static_cast<size_t>(c)] = 1;
      ++total;
    }
  }
  if (total != params_.num_chips()) {
    throw std::invalid_argument("configuration does not hold exactly the chips 1..k^ell");
  }
}

void Configuration::apply_fire(const FiringEvent& e) {
  const int k = params_.k();
  if (layer_of(e.vertex, params_) == params_.num_layers()) {
    throw std::invalid_argument("cannot fire a vertex on the truncation layer");
  }
  if (static_cast<int>(e.tuple.size()) != k) {
    throw std::invalid_argument("firing tuple must have exactly k chips");
  }
  auto& at = chips_[static_cast<size_t>(e.vertex) - 1];
  for (size_t i = 0; i < e.tuple.size(); ++i) {
    if (i > 0 && e.tuple[i - 1] >= e.tuple[i]) {
      throw std::invalid_argument("firing tuple must be strictly increasing");
    }
    if (!std::binary_search(at.begin(), at.end(), e.tuple[i])) {
      throw std::invalid_argument("firing tuple contains a chip absent from the vertex");
    }
  }
  for (int i = 0; i < k; ++i) {
    ChipLabel c = e.tuple[static_cast<size_t>(i)];
    at.erase(std::lower_bound(at.begin(), at.end(), c));
    auto& dst = chips_[static_cast<size_t>(child(e.vertex, i + 1, params_)) - 1];
    dst.insert(std::upper_bound(dst.begin(), dst.end(), c), c);
  }
}

std::string Configuration::dump() const {
  std::ostringstream out;
  for (VertexId v = 1; v <= params_.num_vertices(); ++v) {
    const auto& list = chips_[static_cast<size_t>(v) - 1];
    if (list.empty()) continue;
    out << 'v' << v << ':';
    for (ChipLabel c : list) out << ' ' << c;
    out << '\n';
  }
  return out.str();
}

Configuration fire(const Configuration& c, const FiringEvent& e) {
  Configuration next = c;
  next.apply_fire(e);
  return next;
}

bool is_stable(const Configuration& c) {
  c.validate();
  const auto& p = c.params();
  for (int t = 1; t < p.num_layers(); ++t) {
    int64_t first = p.layer_first(t);
    int64_t size = p.layer_size(t);
    for (int64_t v = first; v < first + size; ++v) {
      if (c.chip_count(static_cast<VertexId>(v)) >= p.k()) return false;
    }
  }
  return true;
}

StablePermutation::StablePermutation(std::vector<ChipLabel> seq) : seq_(std::move(seq)) {
  const auto n = static_cast<int64_t>(seq_.size());
  if (n == 0) throw std::invalid_argument("stable permutation cannot be empty");
  std::vector<char> seen(static_cast<size_t>(n) + 1, 0);
  for (ChipLabel c : seq_) {
    if (c < 1 || c > n || seen[static_cast<size_t>(c)]) {
      throw std::invalid_argument("not a permutation of 1..n");
    }
    seen[static_cast<size_t>(c)] = 1;
  }
  if (seq_.front() != 1 || seq_.back() != n) {
    throw std::invalid_argument(
        "stable permutation must start with the smallest chip and end with the largest");
  }
}

std::string StablePermutation::to_string() const {
  std::ostringstream out;
  for (size_t i = 0; i < seq_.size(); ++i) {
    if (i > 0) out << ' ';
    out << seq_[i];
  }
  return out.str();
}

StablePermutation read_stable(const Configuration& c) {
  if (!is_stable(c)) throw std::invalid_argument("configuration is not stable");
  const auto& p = c.params();
  int t = p.num_layers();
  std::vector<ChipLabel> seq;
  seq.reserve(static_cast<size_t>(p.num_chips()));
  int64_t first = p.layer_first(t);
  for (int64_t v = first; v < first + p.layer_size(t); ++v) {
    auto chips = c.chips_at(static_cast<VertexId>(v));
    if (chips.size() != 1) {
      throw std::invalid_argument("stable configuration must hold one chip per bottom vertex");
    }
    seq.push_back(chips[0]);
  }
  return StablePermutation(std::move(seq));
}

StabilizeOutcome stabilize_full(const Configuration& c0, const Strategy& s) {
  c0.validate();
  const TreeParams& p = c0.params();
  if (c0.chip_count(1) != p.num_chips()) {
    throw std::invalid_argument("stabilize requires the initial configuration");
  }
  Configuration c = c0;
  auto run = s.begin_run(p);
  FiringPlan plan;
  std::vector<int64_t> fires(static_cast<size_t>(p.num_vertices()), 0);

  for (int t = 1; t <= p.ell(); ++t) {
    int64_t first = p.layer_first(t);
    for (int64_t v = first; v < first + p.layer_size(t); ++v) {
      auto vid = static_cast<VertexId>(v);
      while (c.chip_count(vid) >= p.k()) {
        FiringEvent e{vid, run->next_tuple(vid, c.chips_at(vid))};
        c.apply_fire(e);
        ++fires[static_cast<size_t>(v) - 1];
        plan.events.push_back(std::move(e));
      }
    }
  }

  // k^(ell-t) firings at each layer-t vertex, independent of the strategy.
  int64_t expected = p.num_chips() / p.k();  // layer 1
  int64_t total = 0;
  for (int t = 1; t <= p.ell(); ++t) {
    int64_t first = p.layer_first(t);
    for (int64_t v = first; v < first + p.layer_size(t); ++v) {
      if (fires[static_cast<size_t>(v) - 1] != expected) {
        throw std::logic_error("unexpected per-vertex firing count");
      }
      total += expected;
    }
    expected /= p.k();
  }
  if (p.ell() > 0 && total != static_cast<int64_t>(p.ell()) * (p.num_chips() / p.k())) {
    throw std::logic_error("unexpected total firing count");
  }

  return StabilizeOutcome{read_stable(c), std::move(plan), std::move(fires)};
}

StablePermutation stabilize(const Configuration& c, const Strategy& s) {
  return stabilize_full(c, s).perm;
}

StablePermutation replay(const TreeParams& p, const FiringPlan& plan) {
  Configuration c = Configuration::initial(p);
  for (const auto& e : plan.events) c.apply_fire(e);
  return read_stable(c);
}

bool block_extrema_hold(const StablePermutation& sp, const TreeParams& p) {
  const auto& seq = sp.seq();
  if (static_cast<int64_t>(seq.size()) != p.num_chips()) {
    throw std::invalid_argument("permutation length does not match the parameters");
  }
  int64_t block = 1;
  for (int j = 0; j <= p.ell(); ++j) {
    for (int64_t b = 0; b < p.num_chips(); b += block) {
      ChipLabel lo = seq[static_cast<size_t>(b)];
      ChipLabel hi = seq[static_cast<size_t>(b + block - 1)];
      for (int64_t i = b; i < b + block; ++i) {
        ChipLabel c = seq[static_cast<size_t>(i)];
        if (c < lo || c > hi) return false;
      }
    }
    block *= p.k();
  }
  return true;
}

}  // namespace chipfire
