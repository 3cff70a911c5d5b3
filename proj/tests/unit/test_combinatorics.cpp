#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "pspin/combinatorics.hpp"
#include "pspin/errors.hpp"

using namespace pspin;

namespace {

// Brute-force enumeration of strictly increasing r-tuples in [1, w].
std::vector<std::vector<int>> all_increasing(int w, int r) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == r) {
      out.push_back(cur);
      return;
    }
    for (int v = start; v <= w; ++v) {
      cur.push_back(v);
      self(self, v + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
  return out;
}

// Colex order: compare from the largest index down.
bool colex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
}

Count brute_repeated(int N, int r) {
  Count count = 0;
  std::vector<int> t(static_cast<std::size_t>(r), 1);
  for (;;) {
    std::set<int> s(t.begin(), t.end());
    if (static_cast<int>(s.size()) < r) ++count;
    int pos = 0;
    while (pos < r && ++t[static_cast<std::size_t>(pos)] > N) t[static_cast<std::size_t>(pos++)] = 1;
    if (pos == r) break;
  }
  return count;
}

}  // namespace

TEST_CASE("binomial values") {
  CHECK(binom(10, 3) == 120);
  CHECK(binom(5, 0) == 1);
  CHECK(binom(4, 5) == 0);
  CHECK(binom(64, 32) == 1832624140942590534ULL);
  CHECK(binom(200, 3) == 1313400);
  CHECK_THROWS_AS(binom(200, 100), ArithmeticError);
}

TEST_CASE("binomial table obeys Pascal entrywise") {
  BinomialTable table(64, 8);
  for (int n = 1; n <= 64; ++n) {
    for (int k = 1; k <= 8; ++k) CHECK(table(n, k) == table(n - 1, k - 1) + (k <= n - 1 ? table(n - 1, k) : 0));
  }
  CHECK_THROWS_AS(table(65, 2), UsageError);
}

TEST_CASE("colex rank examples for w=4, r=2") {
  CHECK(rank_colex(IndexTuple{1, 2}) == 0);
  CHECK(rank_colex(IndexTuple{2, 4}) == 4);
  CHECK(unrank_colex(5, 2, 4) == IndexTuple{3, 4});
  CHECK_THROWS_AS(unrank_colex(6, 2, 4), UsageError);
  CHECK_THROWS_AS(rank_colex(IndexTuple{3, 2}), UsageError);
}

TEST_CASE("rank/unrank are the colex bijection for w <= 16, r <= 5") {
  for (int w = 1; w <= 16; ++w) {
    for (int r = 0; r <= std::min(w, 5); ++r) {
      auto tuples = all_increasing(w, r);
      std::sort(tuples.begin(), tuples.end(), colex_less);
      REQUIRE(tuples.size() == binom(w, r));
      IndexTuple walker = r == 0 ? IndexTuple{} : unrank_colex(0, r, w);
      for (std::size_t k = 0; k < tuples.size(); ++k) {
        const IndexTuple t{std::span<const int>(tuples[k])};
        REQUIRE(rank_colex(t) == k);
        REQUIRE(unrank_colex(k, r, w) == t);
        REQUIRE(walker == t);
        walker.next_colex(w);
      }
    }
  }
}

TEST_CASE("cardinalities match brute force for N <= 12, p <= 4") {
  CHECK(card_A(5, 3) == 10);
  CHECK(card_A(7, 0) == 1);
  CHECK(card_A(12, 4) == all_increasing(12, 4).size());
  CHECK(card_Q(5, 1, 3) == 6);
  CHECK(card_Q_bar(5, 2, 3) == 3);
  CHECK(card_barNc(5, 2) == 5);
  CHECK(card_barNc(9, 1) == 0);
  CHECK(card_barNc(4, 3) == 40);

  for (int N = 2; N <= 12; ++N) {
    for (int p = 1; p <= std::min(N, 4); ++p) {
      const auto tuples = all_increasing(N, p);
      CHECK(card_A(N, p) == tuples.size());
      for (int k = 1; k < N; ++k) {
        Count q = 0;
        Count q_bar = 0;
        for (const auto& t : tuples) {
          if (t.back() > N - k) ++q;
          if (p >= 2 && t.back() > N - k && t[t.size() - 2] > N - k) ++q_bar;
        }
        CHECK(card_Q(N, k, p) == q);
        CHECK(card_Q(N, k, p) + binom(N - k, p) == binom(N, p));
        if (p >= 2) {
          CHECK(card_Q_bar(N, k, p) == q_bar);
          CHECK(card_Q_tilde(N, k, p) == q - q_bar);
        }
      }
      CHECK(card_barNc(N, p) == brute_repeated(N, p));
    }
  }
}

TEST_CASE("u_N values") {
  CHECK(u_N(100, 2) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(u_N(10, 3) == doctest::Approx(0.17320508075688773).epsilon(1e-15));
  CHECK_THROWS_AS(u_N(1, 2), UsageError);
}

TEST_CASE("u_N^2 |Q_{N,1}^p| approaches p/2 at rate 1/N") {
  for (int p = 2; p <= 5; ++p) {
    const auto error = [p](int N) {
      const double u = u_N(N, p);
      return std::abs(u * u * static_cast<double>(card_Q(N, 1, p)) - p / 2.0);
    };
    // Fitted constant over [20, 200]; N * error increases towards p^2 (p - 1) / 4 from below.
    double c = 0.0;
    for (int N = 20; N <= 200; ++N) c = std::max(c, N * error(N));
    for (int N = 20; N <= 200; ++N) CHECK(error(N) <= c / N * (1.0 + 1e-12));
    const double limit = p * p * (p - 1) / 4.0;
    CHECK(c == doctest::Approx(limit).epsilon(0.1));
    for (int N = 20; N <= 2000; N += 10) CHECK(N * error(N) <= limit * (1.0 + 1e-12));
  }
}

TEST_CASE("couplings containing a site") {
  const auto small = couplings_containing(1, 3, 2);
  REQUIRE(small.size() == 2);
  CHECK(small[0] == IndexTuple{1, 2});
  CHECK(small[1] == IndexTuple{1, 3});
  CHECK(couplings_containing(5, 10, 3).size() == binom(9, 2));

  // Union over sites covers each coupling exactly p times, in increasing colex rank per site.
  const int N = 6;
  const int p = 3;
  std::vector<int> hits(binom(N, p), 0);
  for (int site = 1; site <= N; ++site) {
    Count previous = 0;
    bool first = true;
    for (const auto& t : couplings_containing(site, N, p)) {
      CHECK(t.contains(site));
      CHECK(t.valid_for(N));
      const Count r = rank_colex(t);
      if (!first) CHECK(r > previous);
      previous = r;
      first = false;
      ++hits[r];
    }
  }
  for (int h : hits) CHECK(h == p);
}
