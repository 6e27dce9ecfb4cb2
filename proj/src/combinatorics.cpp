#include "chipfire/combinatorics.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace chipfire {

namespace {

int64_t pow_i64(int64_t base, int exp) {
  int64_t r = 1;
  while (exp-- > 0) {
    if (r > std::numeric_limits<int64_t>::max() / base) {
      throw std::invalid_argument("size overflows 64 bits");
    }
    r *= base;
  }
  return r;
}

BigCount exact_div(BigCount num, const BigCount& den) {
  BigCount q, r;
  boost::multiprecision::divide_qr(num, den, q, r);
  if (r != 0) throw std::logic_error("division expected to be exact had a remainder");
  return q;
}

}  // namespace

BigCount binomial(int64_t n, int64_t r) {
  if (r < 0 || n < 0 || r > n) return 0;
  r = std::min(r, n - r);
  BigCount result = 1;
  for (int64_t i = 1; i <= r; ++i) {
    result *= n - r + i;
    result = exact_div(std::move(result), BigCount(i));
  }
  return result;
}

BigCount kd_catalan(int k, int64_t m) {
  if (k < 1) throw std::invalid_argument("dimension must be at least 1");
  if (m < 0) throw std::invalid_argument("index must be nonnegative");
  // multinomial(km; m,...,m) = prod_{i=2..k} binom(i*m, m)
  BigCount result = 1;
  for (int i = 2; i <= k; ++i) result *= binomial(static_cast<int64_t>(i) * m, m);
  for (int i = 1; i <= k - 1; ++i) {
    result = exact_div(std::move(result), binomial(m + i, m));
  }
  return result;
}

BigCount kappa(int k, int ell) {
  if (k < 2) throw std::invalid_argument("branching factor must be at least 2");
  if (ell < 0) throw std::invalid_argument("ell must be nonnegative");
  BigCount result = 1;
  int64_t exponent = 1;  // k^(t-1)
  int64_t index = ell >= 1 ? pow_i64(k, ell - 1) : 0;  // k^(ell-t)
  for (int t = 1; t <= ell; ++t) {
    result *= boost::multiprecision::pow(kd_catalan(k, index),
                                         static_cast<unsigned>(exponent));
    exponent *= k;
    index /= k;
  }
  return result;
}

std::string BallotWalk::to_string() const {
  std::ostringstream out;
  for (size_t i = 0; i < steps.size(); ++i) {
    if (k > 9 && i > 0) out << ',';
    out << static_cast<int>(steps[i]);
  }
  return out.str();
}

void validate_walk(const BallotWalk& w) {
  if (static_cast<int64_t>(w.steps.size()) != w.m * w.k) {
    throw std::invalid_argument("walk length must be k*m");
  }
  std::vector<int64_t> counts(static_cast<size_t>(w.k) + 1, 0);
  for (int8_t s : w.steps) {
    if (s < 1 || s > w.k) throw std::invalid_argument("walk step out of range");
    ++counts[static_cast<size_t>(s)];
    if (counts[static_cast<size_t>(s)] > w.m) {
      throw std::invalid_argument("walk step appears more than m times");
    }
    if (s > 1 && counts[static_cast<size_t>(s)] > counts[static_cast<size_t>(s) - 1]) {
      throw std::invalid_argument("walk violates the ballot property");
    }
  }
}

BallotWalkStream::BallotWalkStream(int k, int64_t m) : k_(k), m_(m) {
  if (k < 1) throw std::invalid_argument("dimension must be at least 1");
  if (m < 0) throw std::invalid_argument("index must be nonnegative");
  counts_.assign(static_cast<size_t>(k) + 1, 0);
  steps_.reserve(static_cast<size_t>(k) * static_cast<size_t>(m));
}

// Smallest feasible next step at the current prefix, or 0. A step s is
// feasible when count(s) < m and the ballot order survives.
static int smallest_feasible(const std::vector<int64_t>& counts, int from, int k,
                             int64_t m) {
  for (int s = from; s <= k; ++s) {
    if (counts[static_cast<size_t>(s)] < m &&
        (s == 1 || counts[static_cast<size_t>(s) - 1] > counts[static_cast<size_t>(s)])) {
      return s;
    }
  }
  return 0;
}

bool BallotWalkStream::fill_smallest() {
  const auto target = static_cast<size_t>(k_) * static_cast<size_t>(m_);
  while (steps_.size() < target) {
    int s = smallest_feasible(counts_, 1, k_, m_);
    if (s == 0) return false;  // cannot happen from a valid prefix
    steps_.push_back(static_cast<int8_t>(s));
    ++counts_[static_cast<size_t>(s)];
  }
  return true;
}

bool BallotWalkStream::advance() {
  while (!steps_.empty()) {
    int s = steps_.back();
    steps_.pop_back();
    --counts_[static_cast<size_t>(s)];
    int nxt = smallest_feasible(counts_, s + 1, k_, m_);
    if (nxt != 0) {
      steps_.push_back(static_cast<int8_t>(nxt));
      ++counts_[static_cast<size_t>(nxt)];
      return fill_smallest();
    }
  }
  return false;
}

std::optional<BallotWalk> BallotWalkStream::next() {
  if (done_) return std::nullopt;
  bool have = fresh_ ? fill_smallest() : advance();
  fresh_ = false;
  if (!have) {
    done_ = true;
    return std::nullopt;
  }
  return BallotWalk{k_, m_, steps_};
}

uint64_t for_each_ballot_walk(int k, int64_t m,
                              const std::function<bool(const BallotWalk&)>& visit) {
  BallotWalkStream stream(k, m);
  uint64_t n = 0;
  while (auto w = stream.next()) {
    ++n;
    if (!visit(*w)) break;
  }
  return n;
}

std::vector<BallotWalk> enumerate_ballot_walks(int k, int64_t m) {
  std::vector<BallotWalk> out;
  for_each_ballot_walk(k, m, [&](const BallotWalk& w) {
    out.push_back(w);
    return true;
  });
  return out;
}

Dispersion walk_to_dispersion(const BallotWalk& w) {
  validate_walk(w);
  Dispersion d{w.k, w.m, std::vector<std::vector<int>>(static_cast<size_t>(w.k))};
  for (auto& s : d.sets) s.reserve(static_cast<size_t>(w.m));
  for (size_t i = 0; i < w.steps.size(); ++i) {
    d.sets[static_cast<size_t>(w.steps[i]) - 1].push_back(static_cast<int>(i) + 1);
  }
  return d;
}

BallotWalk dispersion_to_walk(const Dispersion& d) {
  if (static_cast<int>(d.sets.size()) != d.k) {
    throw std::invalid_argument("dispersion must have exactly k sets");
  }
  BallotWalk w{d.k, d.m, std::vector<int8_t>(static_cast<size_t>(d.k * d.m), 0)};
  for (size_t j = 0; j < d.sets.size(); ++j) {
    if (static_cast<int64_t>(d.sets[j].size()) != d.m) {
      throw std::invalid_argument("every dispersion set must have m chips");
    }
    for (int chip : d.sets[j]) {
      if (chip < 1 || chip > d.k * d.m) {
        throw std::invalid_argument("dispersion chip out of range");
      }
      if (w.steps[static_cast<size_t>(chip) - 1] != 0) {
        throw std::invalid_argument("dispersion sets overlap");
      }
      w.steps[static_cast<size_t>(chip) - 1] = static_cast<int8_t>(j + 1);
    }
  }
  validate_walk(w);
  return w;
}

Permutation digit_reversal(int k, int ell) {
  if (k < 2) throw std::invalid_argument("branching factor must be at least 2");
  if (ell < 0) throw std::invalid_argument("ell must be nonnegative");
  int64_t n = pow_i64(k, ell);
  Permutation p(static_cast<size_t>(n));
  for (int64_t x = 0; x < n; ++x) {
    int64_t rev = 0, y = x;
    for (int d = 0; d < ell; ++d) {
      rev = rev * k + y % k;
      y /= k;
    }
    p[static_cast<size_t>(x)] = static_cast<int>(rev + 1);
  }
  return p;
}

uint64_t inversions_u64(std::span<const int> p) {
  const auto n = static_cast<int64_t>(p.size());
  std::vector<int64_t> fen(static_cast<size_t>(n) + 1, 0);
  auto add = [&](int64_t i) {
    for (; i <= n; i += i & -i) ++fen[static_cast<size_t>(i)];
  };
  auto prefix = [&](int64_t i) {
    int64_t s = 0;
    for (; i > 0; i -= i & -i) s += fen[static_cast<size_t>(i)];
    return s;
  };
  std::vector<char> seen(static_cast<size_t>(n) + 1, 0);
  uint64_t inv = 0;
  for (int64_t i = 0; i < n; ++i) {
    int64_t v = p[static_cast<size_t>(i)];
    if (v < 1 || v > n || seen[static_cast<size_t>(v)]) {
      throw std::invalid_argument("not a permutation of 1..n");
    }
    seen[static_cast<size_t>(v)] = 1;
    inv += static_cast<uint64_t>(i - prefix(v));
    add(v);
  }
  return inv;
}

BigCount inversions(const Permutation& p) { return BigCount(inversions_u64(p)); }

BigCount max_inversions_closed_form(int k, int ell) {
  if (k < 2) throw std::invalid_argument("branching factor must be at least 2");
  if (ell < 0) throw std::invalid_argument("ell must be nonnegative");
  BigCount kk(k);
  BigCount v = boost::multiprecision::pow(kk, static_cast<unsigned>(2 * ell)) -
               ell * boost::multiprecision::pow(kk, static_cast<unsigned>(ell + 1)) +
               (ell - 1) * boost::multiprecision::pow(kk, static_cast<unsigned>(ell));
  if (v % 4 != 0) throw std::logic_error("inversion count formula not divisible by 4");
  return v / 4;
}

int lds(std::span<const int> p) {
  // Strictly decreasing subsequences of p are strictly increasing ones of
  // the reversal; patience tails over the reversal.
  std::vector<int> tails;
  for (size_t i = p.size(); i-- > 0;) {
    auto it = std::lower_bound(tails.begin(), tails.end(), p[i]);
    if (it == tails.end()) {
      tails.push_back(p[i]);
    } else {
      *it = p[i];
    }
  }
  return static_cast<int>(tails.size());
}

int64_t z_lds_closed_form(int k, int ell) {
  if (k < 2) throw std::invalid_argument("branching factor must be at least 2");
  if (ell < 1) throw std::invalid_argument("ell must be at least 1");
  if (ell % 2 == 0) return (k + 1) * pow_i64(k, ell / 2 - 1) - 1;
  return 2 * pow_i64(k, (ell - 1) / 2) - 1;
}

Permutation inflate(const Permutation& tau, const std::vector<Permutation>& gammas) {
  if (tau.size() != gammas.size()) {
    throw std::invalid_argument("inflate needs one block per element of tau");
  }
  const auto n = tau.size();
  {
    std::vector<char> seen(n + 1, 0);
    for (int x : tau) {
      if (x < 1 || static_cast<size_t>(x) > n || seen[static_cast<size_t>(x)]) {
        throw std::invalid_argument("tau is not a permutation");
      }
      seen[static_cast<size_t>(x)] = 1;
    }
  }
  // Values below block i: all blocks whose tau entry is smaller.
  std::vector<int64_t> start(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (tau[j] < tau[i]) start[i] += static_cast<int64_t>(gammas[j].size());
    }
  }
  Permutation out;
  for (size_t i = 0; i < n; ++i) {
    for (int g : gammas[i]) {
      out.push_back(static_cast<int>(start[i] + g));
    }
  }
  return out;
}

Permutation tensor(const Permutation& tau, const Permutation& gamma) {
  return inflate(tau, std::vector<Permutation>(tau.size(), gamma));
}

Permutation pattern_of(std::span<const int> subseq) {
  std::vector<int> sorted(subseq.begin(), subseq.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("standardization needs distinct entries");
  }
  Permutation out(subseq.size());
  for (size_t i = 0; i < subseq.size(); ++i) {
    out[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), subseq[i]) -
                              sorted.begin() + 1);
  }
  return out;
}

namespace {

bool pattern_search(std::span<const int> w, std::span<const int> sigma,
                    std::vector<int64_t>& chosen) {
  const size_t depth = chosen.size();
  if (depth == sigma.size()) return true;
  const size_t remaining = sigma.size() - depth;
  size_t from = depth == 0 ? 0 : static_cast<size_t>(chosen.back());
  for (size_t i = from; i + remaining <= w.size(); ++i) {
    bool consistent = true;
    for (size_t j = 0; j < depth; ++j) {
      bool value_less = w[static_cast<size_t>(chosen[j]) - 1] < w[i];
      bool sigma_less = sigma[j] < sigma[depth];
      if (value_less != sigma_less) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    chosen.push_back(static_cast<int64_t>(i) + 1);
    if (pattern_search(w, sigma, chosen)) return true;
    chosen.pop_back();
  }
  return false;
}

}  // namespace

PatternMatch contains_pattern(std::span<const int> w, std::span<const int> sigma) {
  if (sigma.size() > 8) {
    throw std::invalid_argument("pattern query limited to length 8");
  }
  if (sigma.empty()) return PatternMatch{true, {}};
  if (sigma.size() > w.size()) return PatternMatch{};
  PatternMatch m;
  std::vector<int64_t> chosen;
  if (pattern_search(w, pattern_of(sigma), chosen)) {
    m.found = true;
    m.positions = std::move(chosen);
  }
  return m;
}

namespace {

int64_t reverse_digits(int64_t v, int k, int ell) {
  int64_t rev = 0;
  for (int d = 0; d < ell; ++d) {
    rev = rev * k + v % k;
    v /= k;
  }
  return rev;
}

}  // namespace

bool is_palindromic(int k, int ell, std::span<const int64_t> values) {
  if (k < 2) throw std::invalid_argument("branching factor must be at least 2");
  if (ell < 0) throw std::invalid_argument("ell must be nonnegative");
  const int64_t bound = pow_i64(k, ell);
  for (int64_t v : values) {
    if (v < 0 || v >= bound) throw std::invalid_argument("value out of range");
  }
  const size_t n = values.size();
  for (size_t i = 0; i < n; ++i) {
    if (values[i] != reverse_digits(values[n - 1 - i], k, ell)) return false;
  }
  return true;
}

std::vector<int64_t> palindromic_extend(int k, int ell,
                                        std::span<const int64_t> values) {
  if (values.empty()) throw std::invalid_argument("input sequence cannot be empty");
  if (!is_palindromic(k, ell, values)) {
    throw std::invalid_argument("input sequence is not palindromic");
  }
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0) throw std::invalid_argument("input sequence contains a zero term");
    if (i > 0 && values[i - 1] <= values[i]) {
      throw std::invalid_argument("input sequence is not strictly decreasing");
    }
  }

  const int64_t top = pow_i64(k, ell);        // value of 1 followed by ell zeros
  const int64_t shift = top * k;              // prefix digit place in ell+2 digits
  const int64_t all_max = top - 1;            // the all-(k-1) string
  // Wrapping b between digits a and c: string a|b|c of length ell+2.
  auto wrap = [&](int64_t a, int64_t b, int64_t c) { return a * shift + b * k + c; };

  // Separator between the prefix-(k-j) and prefix-(k-j-1) groups. When the
  // largest input is the all-(k-1) string, the taller separator would tie
  // with the next group's first element, so the all-zero-core one is used.
  const bool zero_core_separators = values.front() == all_max;

  std::vector<int64_t> out;
  out.reserve(static_cast<size_t>(k) * values.size() + static_cast<size_t>(k) - 1);
  for (int j = 1; j < k; ++j) {
    for (int64_t b : values) out.push_back(wrap(k - j, b, j - 1));
    if (zero_core_separators) {
      out.push_back(wrap(k - j, 0, j));
    } else {
      out.push_back(wrap(k - j - 1, all_max, j - 1));
    }
  }
  for (int64_t b : values) out.push_back(wrap(0, b, k - 1));

  if (out.size() != static_cast<size_t>(k) * values.size() + static_cast<size_t>(k) - 1) {
    throw std::logic_error("extension has the wrong length");
  }
  for (size_t i = 1; i < out.size(); ++i) {
    if (out[i - 1] <= out[i]) throw std::logic_error("extension is not decreasing");
  }
  if (!is_palindromic(k, ell + 2, out)) {
    throw std::logic_error("extension is not palindromic");
  }
  return out;
}

}  // namespace chipfire
