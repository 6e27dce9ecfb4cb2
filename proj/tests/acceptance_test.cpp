// Acceptance suite: runs every criterion end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "chipfire/combinatorics.hpp"
#include "chipfire/search.hpp"
#include "chipfire/strategy.hpp"
#include "chipfire/tree.hpp"
#include "oracles.hpp"

using namespace chipfire;

namespace {

struct Criterion {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "\n    failed: " << what;
    }
  }
  template <typename A, typename B>
  void expect_eq(const A& a, const B& b, const std::string& what) {
    if (!(a == b)) {
      ok = false;
      detail << "\n    failed: " << what << " (got " << a << ", wanted " << b << ")";
    }
  }
};

int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// 1. Enumerated stable-configuration counts equal kappa.
void criterion_counting(Criterion& c) {
  for (auto [k, ell, want] :
       std::vector<std::tuple<int, int, uint64_t>>{{2, 2, 2}, {3, 2, 42}, {2, 3, 56}}) {
    auto t0 = now_ms();
    auto all = list_stable(TreeParams(k, ell));
    std::set<std::vector<ChipLabel>> dedup;
    for (const auto& sp : all) dedup.insert(sp.seq());
    std::ostringstream name;
    name << "materialized count (" << k << "," << ell << ")";
    c.expect_eq(all.size(), want, name.str());
    c.expect_eq(dedup.size(), want, name.str() + " distinct");
    c.expect(BigCount(want) == kappa(k, ell), name.str() + " equals kappa");
    c.expect(now_ms() - t0 < 1000, name.str() + " under 1 s");
  }
  auto t1 = now_ms();
  c.expect_eq(count_stable(TreeParams(2, 4), 1), uint64_t{4484480},
              "count-only (2,4) single worker");
  c.expect(now_ms() - t1 < 300000, "(2,4) single worker under 5 min");
  auto t4 = now_ms();
  c.expect_eq(count_stable(TreeParams(2, 4), 4), uint64_t{4484480},
              "count-only (2,4) four workers");
  c.expect(now_ms() - t4 < 120000, "(2,4) four workers under 2 min");
}

// 2. Catalan formula against the walk enumerator, k <= 4, m <= 5.
void criterion_catalan(Criterion& c) {
  for (int k = 1; k <= 4; ++k) {
    for (int64_t m = 0; m <= 5; ++m) {
      uint64_t streamed =
          for_each_ballot_walk(k, m, [](const BallotWalk&) { return true; });
      std::ostringstream name;
      name << "C_{" << k << "," << m << "}";
      c.expect(kd_catalan(k, m) == BigCount(streamed), name.str());
    }
  }
}

// 3. Unbundling reproduces the digit-reversal permutation.
void criterion_z_equals_r(Criterion& c) {
  for (int k = 2; k <= 3; ++k) {
    for (int ell = 0; ell <= 4; ++ell) {
      auto sp = stabilize(Configuration::initial(TreeParams(k, ell)),
                          unbundle_strategy());
      auto want = digit_reversal(k, ell);
      std::ostringstream name;
      name << "unbundle == digit_reversal at (" << k << "," << ell << ")";
      c.expect(std::equal(sp.seq().begin(), sp.seq().end(), want.begin(), want.end()),
               name.str());
    }
  }
  auto sp = stabilize(Configuration::initial(TreeParams(2, 3)), unbundle_strategy());
  c.expect_eq(sp.to_string(), std::string("1 5 3 7 2 6 4 8"), "printed (2,3) run");
}

// 4. Maximum inversion counts match the closed form and Z attains them.
void criterion_max_inversions(Criterion& c) {
  for (auto [k, ell, want] : std::vector<std::tuple<int, int, int64_t>>{
           {2, 2, 1}, {2, 3, 8}, {3, 2, 9}, {2, 4, 44}}) {
    auto r = max_inversions_search(TreeParams(k, ell), 4);
    std::ostringstream name;
    name << "max inversions (" << k << "," << ell << ")";
    c.expect(r.value == want, name.str());
    c.expect(r.closed_form == want, name.str() + " closed form");
    c.expect(BigCount(inversions_u64(digit_reversal(k, ell))) == r.value,
             name.str() + " attained by the digit reversal");
  }
}

// 5. LDS of the digit-reversal permutation.
void criterion_z_lds(Criterion& c) {
  std::vector<int> k2{1, 2, 3, 5, 7, 11};
  for (int ell = 1; ell <= 6; ++ell) {
    std::ostringstream name;
    name << "lds(R_2(" << ell << "))";
    c.expect_eq(lds(digit_reversal(2, ell)), k2[(size_t)ell - 1], name.str());
  }
  std::vector<int> k3{1, 3, 5, 11, 17};
  for (int ell = 1; ell <= 5; ++ell) {
    std::ostringstream name;
    name << "lds(R_3(" << ell << "))";
    c.expect_eq(lds(digit_reversal(3, ell)), k3[(size_t)ell - 1], name.str());
  }
}

// 6. Searched maxima of the decreasing-subsequence statistic.
void criterion_d_values(Criterion& c) {
  for (auto [k, ell, want] : std::vector<std::tuple<int, int, int64_t>>{
           {2, 3, 3}, {2, 4, 5}, {2, 2, 2}, {3, 2, 3}}) {
    auto r = max_lds_search(TreeParams(k, ell), 4);
    std::ostringstream name;
    name << "D_" << k << "(" << ell << ") = " << want;
    c.expect(r.value == want, name.str());
  }
  for (auto [k, ell] : std::vector<std::pair<int, int>>{{2, 3}, {3, 2}, {2, 4}}) {
    auto pruned = max_lds_search(TreeParams(k, ell), 1, true);
    auto full = max_lds_search(TreeParams(k, ell), 1, false);
    std::ostringstream name;
    name << "pruned == unpruned at (" << k << "," << ell << ")";
    c.expect(pruned.value == full.value && pruned.witness == full.witness, name.str());
  }
}

// 7. Conjecture verdicts.
void criterion_conjecture(Criterion& c) {
  for (auto [k, ell] :
       std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {2, 4}, {3, 2}}) {
    auto r = verify_conjecture(TreeParams(k, ell), 4);
    std::ostringstream name;
    name << "conjecture CONSISTENT at (" << k << "," << ell << ")";
    if (!r.consistent) {
      std::ostringstream extra;
      extra << name.str() << " [reported VIOLATED: searched max " << r.d_value
            << " vs digit-reversal " << r.z_value << ", witness "
            << r.witness.to_string() << "]";
      c.expect(false, extra.str());
    }
  }
}

// 8. Walk <-> dispersion bijection round-trips.
void criterion_bijection(Criterion& c) {
  for (auto [k, m] : std::vector<std::pair<int, int64_t>>{{2, 2}, {2, 4}, {3, 3}}) {
    uint64_t n = 0;
    bool ok = true;
    for_each_ballot_walk(k, m, [&](const BallotWalk& w) {
      ++n;
      if (dispersion_to_walk(walk_to_dispersion(w)) != w) ok = false;
      return true;
    });
    std::ostringstream name;
    name << "round trip over A_{" << k << "," << m << "} (" << n << " walks)";
    c.expect(ok && BigCount(n) == kd_catalan(k, m), name.str());
  }
}

// 9. Property suite: structural invariants at fuzz scale.
void criterion_properties(Criterion& c) {
  uint64_t runs = 0;
  bool extrema_ok = true, firing_ok = true;
  for (int k = 2; k <= 3 && extrema_ok; ++k) {
    for (int ell = 1; ell <= 4; ++ell) {
      TreeParams p(k, ell);
      auto initial = Configuration::initial(p);
      for (uint64_t seed = 0; seed < 1250; ++seed) {
        auto outcome = stabilize_full(initial, random_strategy(seed * 8 + (uint64_t)(k * 4 + ell)));
        ++runs;
        if (!block_extrema_hold(outcome.perm, p)) extrema_ok = false;
        int64_t expected = p.num_chips() / k;
        int64_t total = 0;
        for (int t = 1; t <= ell; ++t) {
          for (int64_t v = p.layer_first(t); v < p.layer_first(t) + p.layer_size(t); ++v) {
            if (outcome.fires_per_vertex[(size_t)v - 1] != expected) firing_ok = false;
            total += outcome.fires_per_vertex[(size_t)v - 1];
          }
          expected /= k;
        }
        if (total != (int64_t)ell * (p.num_chips() / k)) firing_ok = false;
      }
    }
  }
  c.expect(runs == 10000, "10,000 stabilizations executed");
  c.expect(extrema_ok, "block min/max invariant on every run");
  c.expect(firing_ok, "firing-count invariant on every run");

  bool lds_ok = true;
  for (int n = 1; n <= 8 && lds_ok; ++n) {
    std::vector<int> perm((size_t)n);
    for (int i = 0; i < n; ++i) perm[(size_t)i] = i + 1;
    do {
      if (lds(perm) != oracles::lds_bruteforce(perm)) lds_ok = false;
    } while (lds_ok && std::next_permutation(perm.begin(), perm.end()));
  }
  c.expect(lds_ok, "lds vs brute force, exhaustive n <= 8");

  bool inv_ok = true;
  std::mt19937_64 rng(20240809);
  for (int trial = 0; trial < 1000 && inv_ok; ++trial) {
    int n = 1 + (int)(rng() % 512);
    auto p = oracles::random_permutation(rng, n);
    if (inversions_u64(p) != oracles::inversions_quadratic(p)) inv_ok = false;
  }
  c.expect(inv_ok, "inversions fast vs quadratic, 1,000 random perms");
}

// 10. Pattern embedding and the inflation examples.
void criterion_embedding(Criterion& c) {
  std::vector<int> pat{1, 2, 3, 4};
  int embedded = 0;
  do {
    auto pe = pattern_embedding_strategy(pat);
    auto sp = stabilize(Configuration::initial(TreeParams(2, 4)), pe.strategy);
    auto pos = witness_positions(sp, pe.witness_chips);
    bool increasing = std::is_sorted(pos.begin(), pos.end());
    std::vector<int> witness(pe.witness_chips.begin(), pe.witness_chips.end());
    if (increasing && pattern_of(witness) == pat) ++embedded;
  } while (std::next_permutation(pat.begin(), pat.end()));
  c.expect_eq(embedded, 24, "all 24 patterns of length 4 embed in the 16-chip game");

  c.expect(inflate({2, 3, 1}, {{2, 1}, {1, 2}, {2, 1}}) ==
               Permutation{4, 3, 5, 6, 2, 1},
           "231[21,12,21] = 435621");
  c.expect(tensor({3, 2, 1}, {3, 2, 1}) == Permutation{9, 8, 7, 6, 5, 4, 3, 2, 1},
           "tensor(321,321) = 987654321");
}

// 11. Palindromic construction and its closure under iteration.
void criterion_palindromic(Criterion& c) {
  auto ext = palindromic_extend(2, 2, std::vector<int64_t>{2, 1});
  c.expect(ext == std::vector<int64_t>{12, 10, 6, 5, 3},
           "extend(2,2,(2,1)) = (12,10,6,5,3)");

  std::vector<int64_t> values{2, 1};
  int ell = 2;
  while (ell < 8) {
    values = palindromic_extend(2, ell, values);
    ell += 2;
    std::ostringstream name;
    name << "iterate to ell=" << ell;
    bool decreasing = true;
    for (size_t i = 1; i < values.size(); ++i) {
      if (values[i - 1] <= values[i]) decreasing = false;
    }
    c.expect(decreasing, name.str() + " decreasing");
    c.expect(is_palindromic(2, ell, values), name.str() + " palindromic");
    c.expect(std::find(values.begin(), values.end(), 0) == values.end(),
             name.str() + " zero-free");
    auto z = digit_reversal(2, ell);
    std::vector<int64_t> zprime(z.size());
    for (size_t i = 0; i < z.size(); ++i) zprime[i] = z[i] - 1;
    c.expect(oracles::is_subsequence(values, zprime),
             name.str() + " subsequence of the shifted digit reversal");
  }
}

// 12. Reachability fuzz at (2,3).
void criterion_fuzz(Criterion& c) {
  auto r = reachability_fuzz(TreeParams(2, 3), 10000, 1);
  c.expect_eq(r.trials, uint64_t{10000}, "trials run");
  c.expect_eq(r.escapes, uint64_t{0}, "escapes");
}

}  // namespace

int main() {
  struct Entry {
    int number;
    const char* title;
    std::function<void(Criterion&)> run;
  };
  std::vector<Entry> entries{
      {1, "counting: enumeration equals kappa", criterion_counting},
      {2, "Catalan closed form vs walk enumeration", criterion_catalan},
      {3, "unbundling equals the digit-reversal permutation", criterion_z_equals_r},
      {4, "maximum inversions match the closed form", criterion_max_inversions},
      {5, "digit-reversal LDS sequences", criterion_z_lds},
      {6, "searched decreasing-subsequence maxima", criterion_d_values},
      {7, "conjecture verdicts", criterion_conjecture},
      {8, "walk/dispersion bijection round trip", criterion_bijection},
      {9, "property suite", criterion_properties},
      {10, "pattern embedding and inflation examples", criterion_embedding},
      {11, "palindromic construction", criterion_palindromic},
      {12, "reachability fuzz", criterion_fuzz},
  };

  int failures = 0;
  for (auto& e : entries) {
    Criterion c;
    auto t0 = now_ms();
    e.run(c);
    auto ms = now_ms() - t0;
    if (!c.ok) ++failures;
    std::printf("[%s] criterion %d: %s (%lld ms)%s\n", c.ok ? "PASS" : "FAIL",
                e.number, e.title, (long long)ms, c.detail.str().c_str());
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, entries.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", entries.size());
  return 0;
}
