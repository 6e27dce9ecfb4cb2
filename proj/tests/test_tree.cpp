#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "chipfire/strategy.hpp"
#include "chipfire/tree.hpp"

using namespace chipfire;

namespace {
std::vector<ChipLabel> vec(std::span<const ChipLabel> s) {
  return std::vector<ChipLabel>(s.begin(), s.end());
}
}  // namespace

TEST_CASE("tree parameters") {
  TreeParams p(2, 3);
  CHECK(p.num_chips() == 8);
  CHECK(p.num_layers() == 4);
  CHECK(p.num_vertices() == 15);
  CHECK(TreeParams(3, 2).num_vertices() == 13);
  CHECK(TreeParams(2, 0).num_chips() == 1);
  CHECK(TreeParams(2, 0).num_vertices() == 1);

  CHECK_THROWS_AS(TreeParams(1, 2), std::domain_error);
  CHECK_THROWS_AS(TreeParams(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(TreeParams(-3, 2), std::invalid_argument);
  CHECK_THROWS_AS(TreeParams(2, -1), std::invalid_argument);
}

TEST_CASE("layer_of") {
  CHECK(layer_of(1, TreeParams(2, 3)) == 1);
  CHECK(layer_of(2, TreeParams(5, 1)) == 2);
  CHECK(layer_of(7, TreeParams(2, 3)) == 3);
  CHECK(layer_of(4, TreeParams(2, 3)) == 3);
  CHECK(layer_of(8, TreeParams(2, 3)) == 4);
  CHECK_THROWS_AS(layer_of(0, TreeParams(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(layer_of(8, TreeParams(2, 1)), std::invalid_argument);
}

TEST_CASE("child and parent") {
  CHECK(child(1, 1, TreeParams(5, 1)) == 2);
  CHECK(child(2, 2, TreeParams(2, 2)) == 5);
  CHECK(child(1, 3, TreeParams(3, 1)) == 4);
  CHECK_THROWS_AS(child(1, 3, TreeParams(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(child(4, 1, TreeParams(2, 1)), std::invalid_argument);

  CHECK(!parent(1, TreeParams(2, 2)).has_value());
  CHECK(parent(5, TreeParams(2, 2)) == 2);
  CHECK(parent(6, TreeParams(5, 1)) == 1);

  for (int k : {2, 3, 5}) {
    TreeParams p(k, 2);
    for (VertexId v = 1; v <= p.layer_first(2) + p.layer_size(2) - 1; ++v) {
      if (layer_of(v, p) == p.num_layers()) continue;
      for (int j = 1; j <= k; ++j) {
        VertexId c = child(v, j, p);
        CHECK(parent(c, p) == v);
        CHECK(child_slot(c, p) == j);
      }
    }
  }
}

TEST_CASE("initial configuration") {
  auto c = Configuration::initial(TreeParams(2, 2));
  CHECK(vec(c.chips_at(1)) == std::vector<ChipLabel>{1, 2, 3, 4});
  for (VertexId v = 2; v <= 7; ++v) CHECK(c.chips_at(v).empty());

  CHECK(vec(Configuration::initial(TreeParams(2, 0)).chips_at(1)) ==
        std::vector<ChipLabel>{1});
  CHECK(vec(Configuration::initial(TreeParams(3, 1)).chips_at(1)) ==
        std::vector<ChipLabel>{1, 2, 3});
}

TEST_CASE("fire moves the tuple to the children in label order") {
  TreeParams p(2, 2);
  auto c = Configuration::initial(p);

  auto after12 = fire(c, FiringEvent{1, {1, 2}});
  CHECK(vec(after12.chips_at(1)) == std::vector<ChipLabel>{3, 4});
  CHECK(vec(after12.chips_at(2)) == std::vector<ChipLabel>{1});
  CHECK(vec(after12.chips_at(3)) == std::vector<ChipLabel>{2});

  auto after23 = fire(c, FiringEvent{1, {2, 3}});
  CHECK(vec(after23.chips_at(1)) == std::vector<ChipLabel>{1, 4});
  CHECK(vec(after23.chips_at(2)) == std::vector<ChipLabel>{2});
  CHECK(vec(after23.chips_at(3)) == std::vector<ChipLabel>{3});

  TreeParams p3(3, 1);
  auto t = fire(Configuration::initial(p3), FiringEvent{1, {1, 2, 3}});
  CHECK(vec(t.chips_at(2)) == std::vector<ChipLabel>{1});
  CHECK(vec(t.chips_at(3)) == std::vector<ChipLabel>{2});
  CHECK(vec(t.chips_at(4)) == std::vector<ChipLabel>{3});

  // original untouched
  CHECK(c.chips_at(1).size() == 4);
}

TEST_CASE("fire rejects rule violations") {
  TreeParams p(2, 2);
  auto c = Configuration::initial(p);
  CHECK_THROWS_AS(fire(c, FiringEvent{1, {1}}), std::invalid_argument);
  CHECK_THROWS_AS(fire(c, FiringEvent{1, {2, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(fire(c, FiringEvent{1, {1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(fire(c, FiringEvent{2, {1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(fire(c, FiringEvent{4, {1, 2}}), std::invalid_argument);  // last layer
  auto d = fire(c, FiringEvent{1, {1, 2}});
  CHECK_THROWS_AS(fire(d, FiringEvent{1, {1, 2}}), std::invalid_argument);  // 1 left already
}

TEST_CASE("is_stable") {
  CHECK_FALSE(is_stable(Configuration::initial(TreeParams(2, 1))));
  auto stable = Configuration::from_vertex_lists(TreeParams(2, 1), {{2, {1}}, {3, {2}}});
  CHECK(is_stable(stable));
  CHECK(is_stable(Configuration::initial(TreeParams(2, 0))));

  // more chips than the game owns is an invariant violation, not a state
  CHECK_THROWS_AS(Configuration::from_vertex_lists(
                      TreeParams(2, 1), {{1, {1}}, {2, {2}}, {3, {3}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Configuration::from_vertex_lists(TreeParams(2, 1),
                                                   {{2, {1}}, {3, {1}}}),
                  std::invalid_argument);
}

TEST_CASE("dump format") {
  TreeParams p(2, 2);
  auto c = fire(Configuration::initial(p), FiringEvent{1, {1, 3}});
  CHECK(c.dump() == "v1: 2 4\nv2: 1\nv3: 3\n");
}

TEST_CASE("stable permutation invariants") {
  CHECK(StablePermutation({1, 3, 2, 4}).to_string() == "1 3 2 4");
  CHECK(StablePermutation({1}).size() == 1);
  CHECK_THROWS_AS(StablePermutation({2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(StablePermutation({1, 2, 2, 4}), std::invalid_argument);
  CHECK_THROWS_AS(StablePermutation({1, 4, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(StablePermutation({}), std::invalid_argument);
}

TEST_CASE("stabilize hand-checked runs") {
  CHECK(stabilize(Configuration::initial(TreeParams(2, 2)), unbundle_strategy())
            .to_string() == "1 3 2 4");
  CHECK(stabilize(Configuration::initial(TreeParams(2, 3)), unbundle_strategy())
            .to_string() == "1 5 3 7 2 6 4 8");
  CHECK(stabilize(Configuration::initial(TreeParams(2, 0)), identity_strategy())
            .to_string() == "1");
}

TEST_CASE("stabilize rejects non-initial configurations") {
  auto moved = fire(Configuration::initial(TreeParams(2, 2)), FiringEvent{1, {1, 2}});
  CHECK_THROWS_AS(stabilize(moved, identity_strategy()), std::invalid_argument);
}

TEST_CASE("firing counts are strategy independent") {
  for (int k : {2, 3}) {
    for (int ell = 0; ell <= 3; ++ell) {
      TreeParams p(k, ell);
      for (const auto& s :
           {identity_strategy(), unbundle_strategy(), random_strategy(99)}) {
        auto outcome = stabilize_full(Configuration::initial(p), s);
        int64_t expected = p.num_chips() / k;
        int64_t total = 0;
        for (int t = 1; t <= ell; ++t) {
          for (int64_t v = p.layer_first(t); v < p.layer_first(t) + p.layer_size(t);
               ++v) {
            CHECK(outcome.fires_per_vertex[(size_t)v - 1] == expected);
            total += outcome.fires_per_vertex[(size_t)v - 1];
          }
          expected /= k;
        }
        CHECK(total == (ell > 0 ? (int64_t)ell * (p.num_chips() / k) : 0));
        CHECK((int64_t)outcome.plan.events.size() == total);
      }
    }
  }
}

TEST_CASE("replaying a plan reproduces the permutation") {
  TreeParams p(3, 2);
  auto outcome = stabilize_full(Configuration::initial(p), random_strategy(5));
  CHECK(replay(p, outcome.plan) == outcome.perm);
}

TEST_CASE("block extrema invariant on random runs") {
  for (uint64_t seed = 0; seed < 25; ++seed) {
    for (int k : {2, 3}) {
      for (int ell = 1; ell <= 3; ++ell) {
        TreeParams p(k, ell);
        auto sp = stabilize(Configuration::initial(p), random_strategy(seed));
        CHECK(block_extrema_hold(sp, p));
      }
    }
  }
  CHECK(block_extrema_hold(StablePermutation({1, 3, 2, 4}), TreeParams(2, 2)));
  CHECK_FALSE(block_extrema_hold(StablePermutation({1, 3, 4, 2, 5, 7, 6, 8}),
                                 TreeParams(2, 3)));
}

TEST_CASE("smaller chip of a tuple lands strictly left") {
  TreeParams p(2, 3);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto outcome = stabilize_full(Configuration::initial(p), random_strategy(seed));
    std::vector<int> pos((size_t)p.num_chips() + 1, 0);
    const auto& seq = outcome.perm.seq();
    for (size_t i = 0; i < seq.size(); ++i) pos[(size_t)seq[i]] = (int)i;
    // leaf block of each vertex's subtree
    auto block_of = [&](VertexId v) {
      int64_t lo = 0, span = p.num_chips();
      VertexId cur = v;
      std::vector<int> slots;
      while (auto par = parent(cur, p)) {
        slots.push_back(child_slot(cur, p));
        cur = *par;
      }
      for (auto it = slots.rbegin(); it != slots.rend(); ++it) {
        span /= p.k();
        lo += (*it - 1) * span;
      }
      return std::pair(lo, lo + span);
    };
    for (const auto& e : outcome.plan.events) {
      for (size_t i = 0; i + 1 < e.tuple.size(); ++i) {
        auto a = block_of(child(e.vertex, (int)i + 1, p));
        auto b = block_of(child(e.vertex, (int)i + 2, p));
        CHECK(a.second <= b.first);
        CHECK(pos[(size_t)e.tuple[i]] >= a.first);
        CHECK(pos[(size_t)e.tuple[i]] < a.second);
        CHECK(pos[(size_t)e.tuple[i + 1]] >= b.first);
        CHECK(pos[(size_t)e.tuple[i + 1]] < b.second);
      }
    }
  }
}

TEST_CASE("chip conservation along any firing sequence") {
  TreeParams p(2, 3);
  auto c = Configuration::initial(p);
  auto outcome = stabilize_full(c, random_strategy(123));
  for (const auto& e : outcome.plan.events) {
    c.apply_fire(e);
    c.validate();  // pairwise disjoint, union exactly 1..k^ell
  }
  CHECK(is_stable(c));
}
