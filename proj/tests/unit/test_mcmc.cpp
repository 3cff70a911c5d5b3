#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "pspin/errors.hpp"
#include "pspin/exact.hpp"
#include "pspin/mcmc.hpp"

using namespace pspin;

TEST_CASE("sampler config validation") {
  SamplerConfig cfg;
  cfg.sweeps = 10;
  cfg.burn_in_sweeps = 10;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.sweeps = 11;
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.thin = 1;
  CHECK_NOTHROW(cfg.validate());
  const SamplerConfig d = SamplerConfig::with_defaults(12, 5, 100);
  CHECK(d.burn_in_sweeps == 1200);
  CHECK(d.sweeps == 1300);
  CHECK(parse_dynamics("metropolis") == DynamicsKind::metropolis);
  CHECK_THROWS_AS(parse_dynamics("wolff"), UsageError);
}

TEST_CASE("flip probabilities") {
  CHECK(flip_probability(DynamicsKind::glauber, 0.0) == 0.5);
  CHECK(flip_probability(DynamicsKind::metropolis, 0.0) == 1.0);
  CHECK(flip_probability(DynamicsKind::glauber, -1e4) == 0.0);
  CHECK(flip_probability(DynamicsKind::glauber, 1e4) == 1.0);
  CHECK(flip_probability(DynamicsKind::metropolis, -1e4) == 0.0);
  CHECK(flip_probability(DynamicsKind::metropolis, std::log(0.25)) == doctest::Approx(0.25));
  CHECK(accept_flip(DynamicsKind::glauber, 0.0, 0.49));
  CHECK_FALSE(accept_flip(DynamicsKind::glauber, 0.0, 0.5));
}

TEST_CASE("beta zero site means") {
  const ModelParams params{16, 3, 0.0, 0.5};
  const Disorder d = sample_disorder(params, 3);
  Chain chain = Chain::random_start(d, params, 11);
  const int sweeps = 100000;
  std::vector<double> sum(16, 0.0);
  for (int s = 0; s < sweeps; ++s) {
    chain.sweep(DynamicsKind::glauber);
    for (int i = 0; i < 16; ++i) sum[static_cast<std::size_t>(i)] += chain.config().spin(i);
  }
  const double t = std::tanh(0.5);
  const double se = std::sqrt((1.0 - t * t) / sweeps);
  for (int i = 0; i < 16; ++i) CHECK(std::fabs(sum[static_cast<std::size_t>(i)] / sweeps - t) < 4.0 * se);
}

TEST_CASE("stationary distribution at N=3") {
  const ModelParams params{3, 2, 1.0, 0.5};
  const Disorder d = sample_disorder(params, 21);
  const GibbsTable table(d, params);
  for (DynamicsKind kind : {DynamicsKind::glauber, DynamicsKind::metropolis}) {
    Chain chain = Chain::random_start(d, params, 99);
    std::vector<double> counts(8, 0.0);
    const int sweeps = 200000;
    for (int s = 0; s < 1000; ++s) chain.sweep(kind);
    for (int s = 0; s < sweeps; ++s) {
      chain.sweep(kind);
      counts[chain.config().bits()] += 1.0;
    }
    double tv = 0.0;
    for (std::uint64_t b = 0; b < 8; ++b) tv += 0.5 * std::fabs(counts[b] / sweeps - table.probability(b));
    CHECK(tv < 0.01);
  }
}

TEST_CASE("detailed balance of random-scan Glauber") {
  const ModelParams params{4, 3, 1.0, 0.3};
  const Disorder d = sample_disorder(params, 8);
  const GibbsTable table(d, params);
  Chain chain = Chain::random_start(d, params, 5);
  const int n = params.N;
  const int steps = 1000000;
  std::vector<double> visits(16, 0.0);
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> moves;
  for (int s = 0; s < steps; ++s) {
    const std::uint64_t from = chain.config().bits();
    const int site = static_cast<int>(chain.rng().below(static_cast<std::uint64_t>(n)));
    chain.update(site, DynamicsKind::glauber);
    visits[from] += 1.0;
    moves[{from, chain.config().bits()}] += 1.0;
  }
  const double scale = coupling_scale(params);
  double chi2 = 0.0;
  int edges = 0;
  for (std::uint64_t x = 0; x < 16; ++x) {
    for (int i = 0; i < n; ++i) {
      const std::uint64_t y = x ^ (std::uint64_t{1} << i);
      if (y < x) continue;
      const SpinConfig cx(x, n), cy(y, n);
      const double pxy = flip_probability(DynamicsKind::glauber,
                                          flip_delta(cx.spin(i), LocalFieldCache(cx, d)[i], scale, params.h)) / n;
      const double pyx = flip_probability(DynamicsKind::glauber,
                                          flip_delta(cy.spin(i), LocalFieldCache(cy, d)[i], scale, params.h)) / n;
      const double px = table.probability(x), py = table.probability(y);
      CHECK(px * pxy == doctest::Approx(py * pyx).epsilon(1e-10));
      const double hat_xy = moves[{x, y}] / visits[x];
      const double hat_yx = moves[{y, x}] / visits[y];
      const double diff = px * hat_xy - py * hat_yx;
      const double var = px * px * pxy * (1 - pxy) / visits[x] + py * py * pyx * (1 - pyx) / visits[y];
      chi2 += diff * diff / var;
      ++edges;
    }
  }
  CHECK(edges == 32);
  const boost::math::chi_squared dist(edges);
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

namespace {

double exact_mean_overlap(const Disorder& d, const ModelParams& params) {
  return overlap_moment_exact(exact_summary(d, params, false), 1);
}

}  // namespace

TEST_CASE("mean overlap against exact enumeration at N=12") {
  const ModelParams params{12, 3, 0.8, 0.5};
  const Disorder d = sample_disorder(params, 40);
  const double exact = exact_mean_overlap(d, params);
  SamplerConfig cfg = SamplerConfig::with_defaults(12, 7, 20000);

  cfg.kind = DynamicsKind::glauber;
  const ReplicaRun g = run_replicas(d, params, 2, cfg);
  cfg.kind = DynamicsKind::metropolis;
  const ReplicaRun m = run_replicas(d, params, 2, cfg);
  const OverlapSeries& gs = g.pairs[0];
  const OverlapSeries& ms = m.pairs[0];
  REQUIRE(gs.diagnostics.has_value());
  REQUIRE(ms.diagnostics.has_value());
  CHECK(std::fabs(gs.mean() - exact) < 4.0 * gs.standard_error());
  CHECK(std::fabs(ms.mean() - exact) < 4.0 * ms.standard_error());
  CHECK(std::fabs(gs.mean() - ms.mean()) < 4.0 * std::hypot(gs.standard_error(), ms.standard_error()));

  for (int thin : {1, 2, 5}) {
    SamplerConfig t = SamplerConfig::with_defaults(12, 13, 20000);
    t.thin = thin;
    const ReplicaRun r = run_replicas(d, params, 2, t);
    CHECK(r.pairs[0].values.size() == static_cast<std::size_t>((20000 + thin - 1) / thin));
    CHECK(std::fabs(r.pairs[0].mean() - exact) < 4.0 * r.pairs[0].standard_error());
  }
}

TEST_CASE("replica runs are deterministic and label-consistent") {
  const ModelParams params{10, 3, 0.5, 0.5};
  const Disorder d = sample_disorder(params, 2);
  SamplerConfig cfg = SamplerConfig::with_defaults(10, 77, 300);
  const ReplicaRun a = run_replicas(d, params, 3, cfg);
  const ReplicaRun b = run_replicas(d, params, 3, cfg);
  REQUIRE(a.pairs.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a.pairs[k].values == b.pairs[k].values);
  CHECK(a.final_configs == b.final_configs);

  const ReplicaRun c = run_replicas(d, params, 3, cfg, {{2, 1}, {1, 0}, {2, 0}});
  CHECK(c.pairs[0].values == a.pairs[2].values);
  CHECK(c.pairs[1].values == a.pairs[0].values);
  CHECK(c.pairs[2].values == a.pairs[1].values);

  int calls = 0;
  run_replicas(d, params, 3, cfg, {}, [&](int, std::span<const SpinConfig> reps) {
    CHECK(reps.size() == 3);
    ++calls;
  });
  CHECK(calls == 300);

  std::ostringstream csv;
  write_series_csv(csv, a);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "sweep_index,pair_id,overlap");
  std::getline(in, line);
  CHECK(line.rfind("1000,1-2,", 0) == 0);

  CHECK_THROWS_AS(run_replicas(d, params, 1, cfg), UsageError);
  CHECK_THROWS_AS(run_replicas(d, params, 2, cfg, {{0, 0}}), UsageError);
}

TEST_CASE("autocorrelation diagnostics") {
  Xoshiro256 rng(1234);
  std::vector<double> iid(10000);
  for (double& x : iid) x = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const Autocorrelation a = autocorrelation(iid);
  CHECK(a.tau >= 0.4);
  CHECK(a.tau <= 0.7);
  CHECK(a.ess <= static_cast<double>(iid.size()));

  std::vector<double> ar(200000);
  double x = 0.0;
  for (double& v : ar) {
    x = 0.9 * x + rng.normal();
    v = x;
  }
  const Autocorrelation b = autocorrelation(ar);
  CHECK(b.tau == doctest::Approx(9.5).epsilon(0.2));
  CHECK(b.ess == doctest::Approx(ar.size() / (2 * b.tau)));

  const std::vector<double> constant(500, 0.25);
  CHECK_THROWS_AS(autocorrelation(constant), DegenerateSeriesError);
  CHECK_THROWS_AS(autocorrelation(std::vector<double>(50, 1.0)), DegenerateSeriesError);
}
