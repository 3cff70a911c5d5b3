#pragma once

// Exact integer combinatorics for p-spin coupling index sets.
//
// Coupling index sets are strictly increasing tuples 1 <= i_1 < ... < i_r <= w.
// They are ranked in colexicographic order, rank = sum_j C(i_j - 1, j), which
// does not depend on w: a disorder array for N spins is a prefix of the array
// for N + 1 spins.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace pspin {

/// Exact nonnegative count. All arithmetic producing a Count is overflow-checked.
using Count = std::uint64_t;

/// Largest supported interaction order.
inline constexpr int kMaxOrder = 8;

/// Largest n for which every C(n, k) is cached (C(64, 32) < 2^64).
inline constexpr int kBinomialTableMax = 64;

/// A strictly increasing tuple of 1-based indices, length at most kMaxOrder.
class IndexTuple {
 public:
  IndexTuple() = default;
  IndexTuple(std::initializer_list<int> indices);
  explicit IndexTuple(std::span<const int> indices);

  int size() const noexcept { return size_; }
  int operator[](int j) const noexcept { return idx_[static_cast<std::size_t>(j)]; }
  std::span<const int> indices() const noexcept { return {idx_.data(), static_cast<std::size_t>(size_)}; }

  bool contains(int index) const noexcept;

  /// Bit mask with bit (i - 1) set for each index i.
  std::uint64_t mask() const noexcept;

  /// True if strictly increasing and within [1, w].
  bool valid_for(int w) const noexcept;

  /// Advances to the colex successor within [1, w]. Returns false past the last tuple.
  bool next_colex(int w) noexcept;

  friend bool operator==(const IndexTuple& a, const IndexTuple& b) noexcept;

 private:
  std::array<int, kMaxOrder> idx_{};
  int size_ = 0;
};

/// Exact binomial coefficient; 0 when k > n. Cached for n <= kBinomialTableMax,
/// computed with checked 128-bit intermediates above. Throws ArithmeticError on overflow.
Count binom(int n, int k);

/// Pascal-triangle table of C(n, k), n <= n_max, k <= k_max, built with checked additions.
class BinomialTable {
 public:
  BinomialTable(int n_max, int k_max);

  Count operator()(int n, int k) const;
  int n_max() const noexcept { return n_max_; }
  int k_max() const noexcept { return k_max_; }

 private:
  int n_max_;
  int k_max_;
  std::vector<Count> table_;
};

/// Colex rank of a valid tuple: sum over j of C(i_j - 1, j).
Count rank_colex(const IndexTuple& tuple);

/// Inverse of rank_colex over tuples of length r in [1, w]. Throws UsageError for k >= C(w, r).
IndexTuple unrank_colex(Count k, int r, int w);

/// |A_w^r| = C(w, r).
Count card_A(int w, int r);

/// Tuples in A_N^p with largest index in the last k positions: C(N,p) - C(N-k,p).
Count card_Q(int N, int k, int p);

/// Tuples of Q_{N,k}^p whose two largest indices both fall in the last k positions.
Count card_Q_bar(int N, int k, int p);

/// Q minus Q-bar: exactly one index in the last k positions, k * C(N-k, p-1).
Count card_Q_tilde(int N, int k, int p);

/// r-tuples over [1, N] (repetition allowed) with some repeated index: N^r - N!/(N-r)!.
Count card_barNc(int N, int r);

/// Hamiltonian normalization sqrt(p! / (2 N^(p-1))).
double u_N(int N, int p);

/// All p-tuples of [1, N] containing `site` (1-based), in colex order. Exactly C(N-1, p-1) of them.
std::vector<IndexTuple> couplings_containing(int site, int N, int p);

}  // namespace pspin
