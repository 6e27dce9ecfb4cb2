#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chipfire {

/// Exact arbitrary-precision count. No floating point enters any count.
using BigCount = boost::multiprecision::cpp_int;

using Permutation = std::vector<int>;

/// Binomial coefficient, exact.
BigCount binomial(int64_t n, int64_t r);

/// m-th k-dimensional Catalan number: multinomial(km; m,...,m) divided by
/// binom(m+1,m)*...*binom(m+k-1,m). Every division is checked exact.
BigCount kd_catalan(int k, int64_t m);

/// Number of distinct stable configurations of the k^ell-chip game:
/// the product over t = 1..ell of kd_catalan(k, k^(ell-t))^(k^(t-1)).
BigCount kappa(int k, int ell);

/// A lattice walk of k*m steps, each a child index in 1..k, where every
/// index appears exactly m times and every prefix holds count(1) >=
/// count(2) >= ... >= count(k).
struct BallotWalk {
  int k;
  int64_t m;
  std::vector<int8_t> steps;

  /// Digit string for k <= 9 ("1122"), comma-separated indices otherwise.
  std::string to_string() const;

  bool operator==(const BallotWalk&) const = default;
};

void validate_walk(const BallotWalk& w);

/// Restartable lexicographic stream over all ballot walks for (k, m).
class BallotWalkStream {
 public:
  BallotWalkStream(int k, int64_t m);
  std::optional<BallotWalk> next();

 private:
  bool fill_smallest();
  bool advance();

  int k_;
  int64_t m_;
  std::vector<int8_t> steps_;
  std::vector<int64_t> counts_;
  bool fresh_ = true;
  bool done_ = false;
};

/// Calls `visit` for every ballot walk in lexicographic order until it
/// returns false; returns how many walks were visited.
uint64_t for_each_ballot_walk(int k, int64_t m,
                              const std::function<bool(const BallotWalk&)>& visit);

/// Materialized lexicographic list of all ballot walks.
std::vector<BallotWalk> enumerate_ballot_walks(int k, int64_t m);

/// The split of chips 1..k*m among k children: sets[j-1] holds the chips
/// sent to the j-th leftmost child, ascending. Every prefix [1..t] meets
/// set 1 at least as often as set 2, and so on.
struct Dispersion {
  int k;
  int64_t m;
  std::vector<std::vector<int>> sets;

  bool operator==(const Dispersion&) const = default;
};

/// Mutually inverse: chip i goes to child steps[i].
Dispersion walk_to_dispersion(const BallotWalk& w);
BallotWalk dispersion_to_walk(const Dispersion& d);

/// Permutation of 1..k^ell whose position p holds 1 plus the ell-digit
/// base-k reversal of p-1.
Permutation digit_reversal(int k, int ell);

/// Number of pairs i < j with p[i] > p[j]. O(n log n).
uint64_t inversions_u64(std::span<const int> p);
BigCount inversions(const Permutation& p);

/// (k^(2*ell) - ell*k^(ell+1) + (ell-1)*k^ell) / 4, checked exact.
BigCount max_inversions_closed_form(int k, int ell);

/// Length of the longest strictly decreasing subsequence. O(n log n).
int lds(std::span<const int> p);

/// Longest decreasing subsequence of the digit-reversal permutation:
/// (k+1)*k^(ell/2-1) - 1 for even ell, 2*k^((ell-1)/2) - 1 for odd ell.
/// Requires ell >= 1.
int64_t z_lds_closed_form(int k, int ell);

/// Block construction: |tau| blocks laid left to right, block i
/// order-isomorphic to gammas[i], one element per block order-isomorphic
/// to tau.
Permutation inflate(const Permutation& tau, const std::vector<Permutation>& gammas);

/// inflate with every block equal to gamma.
Permutation tensor(const Permutation& tau, const Permutation& gamma);

/// Standardization: the rank sequence of a list of distinct integers.
Permutation pattern_of(std::span<const int> subseq);

struct PatternMatch {
  bool found = false;
  std::vector<int64_t> positions;  // 1-based witness indices when found
};

/// Whether some subsequence of `w` standardizes to `sigma`; returns the
/// first witness in position order. Patterns longer than 8 are rejected
/// (search cost grows too fast beyond that).
PatternMatch contains_pattern(std::span<const int> w, std::span<const int> sigma);

/// Whether the i-th value's ell-digit base-k string is the digit reversal
/// of the i-th-from-last value's string. Values must lie in [0, k^ell).
bool is_palindromic(int k, int ell, std::span<const int64_t> values);

/// Grows a strictly decreasing, zero-free palindromic sequence for
/// (k, ell) into one for (k, ell+2) of length k*d + k - 1: each input
/// string is wrapped with every prefix digit k-1..1 and the matching
/// suffix, with one self-paired separator between consecutive groups, and
/// the zero-prefixed group closes the sequence.
std::vector<int64_t> palindromic_extend(int k, int ell,
                                        std::span<const int64_t> values);

}  // namespace chipfire
