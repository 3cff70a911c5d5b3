#include "pspin/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pspin/errors.hpp"

namespace pspin {

namespace {

Count checked_add(Count a, Count b) {
  Count out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw ArithmeticError("count addition overflows 64 bits");
  return out;
}

Count checked_sub(Count a, Count b) {
  if (b > a) throw ArithmeticError("count subtraction underflows");
  return a - b;
}

Count checked_mul(Count a, Count b) {
  Count out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw ArithmeticError("count multiplication overflows 64 bits");
  return out;
}

const BinomialTable& cached_table() {
  static const BinomialTable table(kBinomialTableMax, kBinomialTableMax);
  return table;
}

}  // namespace

IndexTuple::IndexTuple(std::initializer_list<int> indices)
    : IndexTuple(std::span<const int>(indices.begin(), indices.size())) {}

IndexTuple::IndexTuple(std::span<const int> indices) {
  if (indices.size() > static_cast<std::size_t>(kMaxOrder)) {
    throw UsageError("index tuple longer than " + std::to_string(kMaxOrder));
  }
  std::copy(indices.begin(), indices.end(), idx_.begin());
  size_ = static_cast<int>(indices.size());
}

bool IndexTuple::contains(int index) const noexcept {
  return std::find(idx_.begin(), idx_.begin() + size_, index) != idx_.begin() + size_;
}

std::uint64_t IndexTuple::mask() const noexcept {
  std::uint64_t m = 0;
  for (int j = 0; j < size_; ++j) m |= std::uint64_t{1} << (idx_[j] - 1);
  return m;
}

bool IndexTuple::valid_for(int w) const noexcept {
  for (int j = 0; j < size_; ++j) {
    if (idx_[j] < 1 || idx_[j] > w) return false;
    if (j > 0 && idx_[j] <= idx_[j - 1]) return false;
  }
  return true;
}

bool IndexTuple::next_colex(int w) noexcept {
  for (int j = 0; j < size_; ++j) {
    const int limit = (j + 1 < size_) ? idx_[j + 1] : w + 1;
    if (idx_[j] + 1 < limit) {
      ++idx_[j];
      for (int i = 0; i < j; ++i) idx_[i] = i + 1;
      return true;
    }
  }
  return false;
}

bool operator==(const IndexTuple& a, const IndexTuple& b) noexcept {
  return std::ranges::equal(a.indices(), b.indices());
}

BinomialTable::BinomialTable(int n_max, int k_max)
    : n_max_(n_max), k_max_(k_max),
      table_(static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(k_max + 1), 0) {
  if (n_max < 0 || k_max < 0) throw UsageError("binomial table bounds must be nonnegative");
  const auto at = [&](int n, int k) -> Count& {
    return table_[static_cast<std::size_t>(n) * static_cast<std::size_t>(k_max_ + 1) + static_cast<std::size_t>(k)];
  };
  for (int n = 0; n <= n_max; ++n) {
    at(n, 0) = 1;
    for (int k = 1; k <= std::min(n, k_max); ++k) {
      at(n, k) = checked_add(at(n - 1, k - 1), k <= n - 1 ? at(n - 1, k) : 0);
    }
  }
}

Count BinomialTable::operator()(int n, int k) const {
  if (n < 0 || k < 0 || n > n_max_ || k > k_max_) {
    throw UsageError("binomial (" + std::to_string(n) + ", " + std::to_string(k) + ") outside table bounds");
  }
  return table_[static_cast<std::size_t>(n) * static_cast<std::size_t>(k_max_ + 1) + static_cast<std::size_t>(k)];
}

Count binom(int n, int k) {
  if (n < 0 || k < 0) throw UsageError("binomial arguments must be nonnegative");
  if (k > n) return 0;
  if (n <= kBinomialTableMax) return cached_table()(n, k);
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i is exact at every step (it equals C(n - k + i, i)).
    acc = acc * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (acc > std::numeric_limits<Count>::max()) throw ArithmeticError("binomial overflows 64 bits");
  }
  return static_cast<Count>(acc);
}

Count rank_colex(const IndexTuple& tuple) {
  Count rank = 0;
  for (int j = 0; j < tuple.size(); ++j) {
    if (tuple[j] < 1 || (j > 0 && tuple[j] <= tuple[j - 1])) {
      throw UsageError("rank_colex: tuple is not strictly increasing from 1");
    }
    rank = checked_add(rank, binom(tuple[j] - 1, j + 1));
  }
  return rank;
}

IndexTuple unrank_colex(Count k, int r, int w) {
  if (r < 0 || r > kMaxOrder || w < 0) throw UsageError("unrank_colex: bad shape");
  if (k >= binom(w, r)) throw UsageError("unrank_colex: rank out of range");
  std::array<int, kMaxOrder> idx{};
  int upper = w;  // largest admissible value of i_j - 1 is upper - 1
  for (int j = r; j >= 1; --j) {
    // Largest c < upper with C(c, j) <= k.
    int c = upper - 1;
    while (binom(c, j) > k) --c;
    idx[static_cast<std::size_t>(j - 1)] = c + 1;
    k -= binom(c, j);
    upper = c;
  }
  return IndexTuple(std::span<const int>(idx.data(), static_cast<std::size_t>(r)));
}

Count card_A(int w, int r) {
  if (r < 0 || r > w) throw UsageError("card_A requires 0 <= r <= w");
  return binom(w, r);
}

Count card_Q(int N, int k, int p) {
  if (k < 1 || k >= N || p < 1 || p > N) throw UsageError("card_Q requires 1 <= k < N and 1 <= p <= N");
  return checked_sub(binom(N, p), binom(N - k, p));
}

Count card_Q_bar(int N, int k, int p) {
  return checked_sub(card_Q(N, k, p), card_Q_tilde(N, k, p));
}

Count card_Q_tilde(int N, int k, int p) {
  if (k < 1 || k >= N || p < 1 || p > N) throw UsageError("card_Q_tilde requires 1 <= k < N and 1 <= p <= N");
  return checked_mul(static_cast<Count>(k), binom(N - k, p - 1));
}

Count card_barNc(int N, int r) {
  if (N < 1 || r < 1) throw UsageError("card_barNc requires N >= 1 and r >= 1");
  Count all = 1;
  Count distinct = 1;
  for (int j = 0; j < r; ++j) {
    all = checked_mul(all, static_cast<Count>(N));
    distinct = checked_mul(distinct, static_cast<Count>(std::max(N - j, 0)));
  }
  return checked_sub(all, distinct);
}

double u_N(int N, int p) {
  if (p < 2 || N < p) throw UsageError("u_N requires p >= 2 and N >= p");
  double factorial = 1.0;
  for (int j = 2; j <= p; ++j) factorial *= j;
  return std::sqrt(factorial / (2.0 * std::pow(static_cast<double>(N), p - 1)));
}

std::vector<IndexTuple> couplings_containing(int site, int N, int p) {
  if (p < 1 || p > N || p > kMaxOrder) throw UsageError("couplings_containing: need 1 <= p <= min(N, 8)");
  if (site < 1 || site > N) throw UsageError("couplings_containing: site out of range");
  std::vector<IndexTuple> out;
  out.reserve(static_cast<std::size_t>(binom(N - 1, p - 1)));
  std::array<int, kMaxOrder> others{};
  for (int j = 0; j < p - 1; ++j) others[static_cast<std::size_t>(j)] = j + 1;
  IndexTuple rest(std::span<const int>(others.data(), static_cast<std::size_t>(p - 1)));
  // Enumerate (p-1)-subsets of [1, N-1], then lift indices >= site past it.
  do {
    std::array<int, kMaxOrder> full{};
    int n = 0;
    bool placed = false;
    for (int j = 0; j < p - 1; ++j) {
      int v = rest[j] >= site ? rest[j] + 1 : rest[j];
      if (!placed && site < v) {
        full[static_cast<std::size_t>(n++)] = site;
        placed = true;
      }
      full[static_cast<std::size_t>(n++)] = v;
    }
    if (!placed) full[static_cast<std::size_t>(n++)] = site;
    out.emplace_back(std::span<const int>(full.data(), static_cast<std::size_t>(n)));
  } while (rest.next_colex(N - 1));
  // Colex order of the lifted tuples matches the order of `rest`, since lifting is monotone.
  return out;
}

}  // namespace pspin
