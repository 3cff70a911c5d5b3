#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pspin/combinatorics.hpp"
#include "pspin/errors.hpp"
#include "pspin/exact.hpp"

using namespace pspin;

namespace {

// Naive enumeration in plain binary order with full Hamiltonian evaluation.
struct Naive {
  double log_Z;
  std::vector<double> m;
  std::vector<double> c;
};

Naive naive(const Disorder& d, const ModelParams& params) {
  const int n = params.N;
  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<double> e(total);
  double mx = -1e300;
  for (std::uint64_t b = 0; b < total; ++b) {
    e[b] = neg_hamiltonian(SpinConfig(b, n), d, params);
    mx = std::max(mx, e[b]);
  }
  double z = 0.0;
  std::vector<double> m(static_cast<std::size_t>(n), 0.0);
  std::vector<double> c(static_cast<std::size_t>(n * n), 0.0);
  for (std::uint64_t b = 0; b < total; ++b) {
    const double w = std::exp(e[b] - mx);
    const SpinConfig s(b, n);
    z += w;
    for (int i = 0; i < n; ++i) {
      m[static_cast<std::size_t>(i)] += w * s.spin(i);
      for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(i * n + j)] += w * s.spin(i) * s.spin(j);
    }
  }
  for (auto& v : m) v /= z;
  for (auto& v : c) v /= z;
  return {mx + std::log(z), m, c};
}

}  // namespace

TEST_CASE("zero disorder is a product measure") {
  for (int n : {2, 5, 9}) {
    const ModelParams params{n, 2, 0.7, 0.5};
    const Disorder zero(n, 2, 0, std::vector<double>(static_cast<std::size_t>(n * (n - 1) / 2), 0.0));
    const auto s = exact_summary(zero, params, true);
    CHECK(s.log_Z == doctest::Approx(n * std::log(2.0 * std::cosh(0.5))).epsilon(1e-14));
    for (double m : s.one_point) CHECK(m == doctest::Approx(std::tanh(0.5)).epsilon(1e-14));
    CHECK(overlap_moment_exact(s, 1) == doctest::Approx(std::pow(std::tanh(0.5), 2)).epsilon(1e-13));
  }
  const ModelParams two{2, 2, 1.0, 0.5};
  const auto s2 = exact_summary(Disorder(2, 2, 0, {0.0}), two, false);
  CHECK(std::exp(s2.log_Z) == doctest::Approx(5.086161269630487).epsilon(1e-13));
  CHECK(std::log(2.0 * std::cosh(0.5)) == doctest::Approx(0.8132616875182228));
}

TEST_CASE("second overlap moment of the product measure") {
  const ModelParams params{10, 3, 0.0, 0.5};
  const auto d = sample_disorder(params, 4);
  const auto s = exact_summary(d, params, true);
  const double q = std::pow(std::tanh(0.5), 2);
  // Independent sites: <R^2> = q^2 + (1 - q^2) / N.
  CHECK(overlap_moment_exact(s, 2) == doctest::Approx(q * q + (1.0 - q * q) / 10.0).epsilon(1e-12));
  CHECK(overlap_moment_exact(s, 2) == doctest::Approx(0.141044).epsilon(1e-5));
  const auto no_pairs = exact_summary(d, params, false);
  CHECK_THROWS_AS(overlap_moment_exact(no_pairs, 2), UsageError);
  CHECK_THROWS_AS(overlap_moment_exact(s, 3), UsageError);
}

TEST_CASE("Gray-code sweep agrees with naive enumeration") {
  for (int n = 3; n <= 12; ++n) {
    for (int p : {2, 3}) {
      const ModelParams params{n, p, 1.4, 0.3};
      const auto d = sample_disorder(params, 1000 + static_cast<std::uint64_t>(n * 10 + p));
      const auto s = exact_summary(d, params, true);
      const auto ref = naive(d, params);
      CHECK(std::abs(s.log_Z - ref.log_Z) < 1e-10);
      for (int i = 0; i < n; ++i) CHECK(std::abs(s.one_point[static_cast<std::size_t>(i)] - ref.m[static_cast<std::size_t>(i)]) < 1e-10);
      for (std::size_t k = 0; k < ref.c.size(); ++k) CHECK(std::abs(s.two_point[k] - ref.c[k]) < 1e-10);
      CHECK(overlap_moment_exact(s, 2) >= 0.0);
      CHECK(overlap_moment_exact(s, 2) <= 1.0);
    }
  }
}

TEST_CASE("large beta stays finite") {
  const ModelParams params{14, 3, 40.0, 0.5};
  const auto d = sample_disorder(params, 8);
  const auto s = exact_summary(d, params, true);
  CHECK(std::isfinite(s.log_Z));
  for (double m : s.one_point) CHECK(std::abs(m) <= 1.0 + 1e-12);
}

TEST_CASE("resource gates") {
  const ModelParams params{21, 3, 0.1, 0.5};
  const Disorder d = sample_disorder(params, 1);
  CHECK_THROWS_AS(exact_summary(d, params, true), ResourceLimitError);
  CHECK_THROWS_AS(GibbsTable(d, params), ResourceLimitError);
  ExactGates tight;
  tight.max_N = 10;
  CHECK_THROWS_AS(exact_summary(sample_disorder(ModelParams{11, 2, 0.1, 0.5}, 1), ModelParams{11, 2, 0.1, 0.5}, false, tight),
                  ResourceLimitError);
}

TEST_CASE("N = 2 free energy density closed form") {
  const ModelParams params{2, 2, 0.9, 0.4};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = sample_disorder(params, seed);
    const double a = params.beta * u_N(2, 2) * d.couplings()[0];
    const double expected = 0.5 * std::log(std::exp(a) * 2.0 * std::cosh(2.0 * params.h) + 2.0 * std::exp(-a));
    CHECK(pn_sample(params, seed) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("free energy density samples") {
  SUBCASE("beta = 0 gives log(2 cosh h) for every seed") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      CHECK(pn_sample(ModelParams{9, 3, 0.0, 0.5}, seed) == doctest::Approx(std::log(2.0 * std::cosh(0.5))).epsilon(1e-14));
    }
  }
  SUBCASE("variance across seeds shrinks as beta decreases") {
    auto variance = [](double beta) {
      double s1 = 0.0;
      double s2 = 0.0;
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const double v = pn_sample(ModelParams{12, 3, beta, 0.5}, seed);
        s1 += v;
        s2 += v * v;
      }
      return (s2 - s1 * s1 / 100.0) / 99.0;
    };
    CHECK(variance(0.01) < variance(0.1));
  }
}

TEST_CASE("exact replica sampling") {
  SUBCASE("beta = 0 site means") {
    const ModelParams params{8, 3, 0.0, 0.5};
    const GibbsTable table(sample_disorder(params, 2), params);
    const auto draws = exact_replica_sample(table, 10000, 42);
    const double m = std::tanh(0.5);
    const double se = std::sqrt((1.0 - m * m) / 10000.0);
    for (int i = 0; i < 8; ++i) {
      double mean = 0.0;
      for (const auto& s : draws) mean += s.spin(i);
      CHECK(std::abs(mean / 10000.0 - m) < 4.0 * se);
    }
  }
  SUBCASE("empirical overlap matches the correlation sum") {
    const ModelParams params{10, 3, 0.8, 0.3};
    const auto d = sample_disorder(params, 9);
    const GibbsTable table(d, params);
    const auto summary = exact_summary(d, params, true);
    CHECK(table.log_Z() == doctest::Approx(summary.log_Z).epsilon(1e-12));
    const auto draws = exact_replica_sample(table, 20000, 7);
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < draws.size(); i += 2) {
      const double r = overlap(draws[i], draws[i + 1]);
      s1 += r;
      s2 += r * r;
    }
    const double n = 10000.0;
    const double mean = s1 / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - overlap_moment_exact(summary, 1)) < 4.0 * se);
    const double mean_sq = s2 / n;
    CHECK(std::abs(mean_sq - overlap_moment_exact(summary, 2)) < 4.0 * se * 2.0);
  }
  SUBCASE("zero count") {
    const ModelParams params{4, 2, 0.3, 0.5};
    const GibbsTable table(sample_disorder(params, 2), params);
    CHECK(exact_replica_sample(table, 0, 1).empty());
  }
}

TEST_CASE("T-decomposition") {
  SUBCASE("identity on random instances") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const ModelParams params{10, 3, 1.5, 0.4};
      const GibbsTable table(sample_disorder(params, seed), params);
      const auto reps = exact_replica_sample(table, 2, seed + 100);
      const auto t = t_decomposition(table, 3, reps[0], reps[1], 0.37);
      CHECK(std::abs(t.residual()) < 1e-10);
      const auto swapped = t_decomposition(table, 3, reps[1], reps[0], 0.37);
      CHECK(swapped.t_first == doctest::Approx(t.t_second));
      CHECK(swapped.t_second == doctest::Approx(t.t_first));
      CHECK(swapped.t_pair == doctest::Approx(t.t_pair));
      CHECK(swapped.t_const == doctest::Approx(t.t_const));
    }
  }
  SUBCASE("beta = 0 product measure") {
    const ModelParams params{8, 3, 0.0, 0.5};
    const GibbsTable table(sample_disorder(params, 1), params);
    const auto reps = exact_replica_sample(table, 2, 5);
    const double m = std::tanh(0.5);
    CHECK(table.parity_expectation(0b11) == doctest::Approx(m * m).epsilon(1e-13));
    // Tuples with a repeated index reduce to b = 1, so T vanishes only asymptotically;
    // the exact value counts N distinct-free pairs: (N(N-1) m^4 + N) / N^2.
    const double q = m * m;
    const auto t = t_decomposition(table, 3, reps[0], reps[1], q);
    CHECK(t.t_const == doctest::Approx((8.0 * 7.0 * q * q + 8.0) / 64.0 - q * q).epsilon(1e-12));
  }
  SUBCASE("budget gate") {
    const ModelParams params{12, 4, 0.1, 0.5};
    const GibbsTable table(sample_disorder(params, 1), params);
    const auto reps = exact_replica_sample(table, 2, 5);
    CHECK_THROWS_AS(t_decomposition(table, 4, reps[0], reps[1], 0.2), ResourceLimitError);
  }
}
