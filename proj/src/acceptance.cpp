#include "pspin/acceptance.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <ostream>

#include "pspin/combinatorics.hpp"
#include "pspin/errors.hpp"
#include "pspin/estimators.hpp"
#include "pspin/exact.hpp"
#include "pspin/mcmc.hpp"

namespace pspin {

AcceptanceLevel parse_level(const std::string& text) {
  if (text == "quick") return AcceptanceLevel::quick;
  if (text == "full") return AcceptanceLevel::full;
  throw UsageError("unknown level '" + text + "' (expected quick or full)");
}

std::string to_string(AcceptanceLevel level) { return level == AcceptanceLevel::quick ? "quick" : "full"; }

namespace {

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Context {
  const AcceptanceOptions& options;
  bool quick() const { return options.level == AcceptanceLevel::quick; }
  const QuadratureRule& rule() const { return cached_rule(options.quad_order); }
  std::uint64_t seed(int id) const { return derive_seed(options.seed, static_cast<std::uint64_t>(id)); }
  double beta_run() const { return 0.8 * beta_H(3); }
  EstimatorConfig estimator() const {
    EstimatorConfig cfg;
    cfg.quad_order = options.quad_order;
    return cfg;
  }
};

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds; 0 for none
  std::function<Outcome(const Context&)> run;
};

// Parameter grid shared by the fixed-point criteria.
template <class Fn>
void for_grid(Fn&& fn) {
  for (int p : {2, 3, 4, 8}) {
    const double bh = beta_H(p);
    for (double h : {0.1, 0.5, 1.0})
      for (double beta : {0.0, 0.5 * bh, bh}) fn(ThermoParams{p, beta, h});
  }
}

Outcome fixed_point(const Context& ctx) {
  double worst = 0.0;
  std::size_t max_roots = 0, min_roots = 1000;
  for_grid([&](const ThermoParams& tp) {
    const RootReport r = solve_q(tp, ctx.rule());
    const double q = r.principal;
    worst = std::max(worst, std::fabs(q - overlap_map(tp, q, ctx.rule())));
    max_roots = std::max(max_roots, r.roots.size());
    min_roots = std::min(min_roots, r.roots.size());
  });
  const bool ok = worst < 1e-12 && max_roots == 1 && min_roots == 1;
  return {ok, fmt("max residual %.2e (< 1e-12), roots per point %zu..%zu (== 1)", worst, min_roots, max_roots)};
}

Outcome q_hat_identities(const Context& ctx) {
  double w2 = 0.0, w4 = 0.0;
  for_grid([&](const ThermoParams& tp) {
    const double q = solve_q(tp, ctx.rule()).principal;
    w2 = std::max(w2, std::fabs(q_hat(2, q, tp, ctx.rule()) - q));
    const double lhs = 1.0 - 2.0 * q + q_hat(4, q, tp, ctx.rule());
    w4 = std::max(w4, std::fabs(lhs - sech4_expectation(q, tp, ctx.rule())));
  });
  return {w2 < 1e-10 && w4 < 1e-10, fmt("max |q2 - q| %.2e, max |1-2q+q4 - E sech^4| %.2e (< 1e-10)", w2, w4)};
}

Outcome free_energy(const Context& ctx) {
  const QuadratureRule& rule = ctx.rule();
  double env = 0.0, der = 0.0;
  for (int p : {2, 3, 4, 8}) {
    const double bh = beta_H(p);
    for (double h : {0.1, 0.5, 1.0}) {
      for (double beta : {0.5 * bh, bh, 0.5}) {
        const ThermoParams tp{p, beta, h};
        const double q = solve_q(tp, rule).principal;
        const double dq = 1e-5;
        env = std::max(env, std::fabs(rs_free_energy(tp, q + dq, rule) - rs_free_energy(tp, q - dq, rule)) / (2 * dq));
        const double d = 1e-4;
        auto phi = [&](double b) {
          const ThermoParams t2{p, b, h};
          return rs_free_energy(t2, solve_q(t2, rule).principal, rule);
        };
        const double fd = (phi(beta + d) - phi(beta - d)) / (2 * d);
        der = std::max(der, std::fabs(fd - beta / 2.0 * (1.0 - std::pow(q, p))));
      }
    }
  }
  return {env < 1e-8 && der < 1e-6, fmt("max |dF/dq| %.2e (< 1e-8), max |dPhi/dbeta - beta(1-q^p)/2| %.2e (< 1e-6)", env, der)};
}

Outcome large_p(const Context& ctx) {
  const double target = std::tanh(0.5) * std::tanh(0.5);
  std::vector<double> gaps;
  for (int p : {5, 10, 20, 40}) gaps.push_back(std::fabs(solve_q({p, 0.1, 0.5}, ctx.rule()).principal - target));
  bool monotone = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) monotone &= gaps[i] <= gaps[i - 1];
  const bool ok = gaps.back() < 1e-6 && monotone;
  return {ok, fmt("gaps p=5,10,20,40: %.2e %.2e %.2e %.2e; p=40 gap < 1e-6, non-increasing: %s", gaps[0], gaps[1], gaps[2],
                  gaps[3], monotone ? "yes" : "no")};
}

Outcome closure(const Context& ctx) {
  double worst = 0.0;
  for (int p : {2, 3, 5}) {
    for (double h : {0.1, 0.5, 1.0}) {
      const TheorySolution s = solve_theory({p, 0.0, h}, ctx.options.quad_order, ctx.options.a2_variant);
      worst = std::max(worst, std::fabs(s.clt_var - (1.0 - std::pow(std::tanh(h), 4))));
    }
  }
  const TheorySolution proof = solve_theory({3, 0.0, 0.5}, ctx.options.quad_order, A2Variant::proof);
  const TheorySolution printed = solve_theory({3, 0.0, 0.5}, ctx.options.quad_order, A2Variant::printed);
  const double split = std::fabs(proof.clt_var - printed.clt_var);
  const bool ok = worst < 1e-10 && split > 1e-3;
  return {ok, fmt("variant %s: max |clt_var - (1 - tanh^4 h)| %.2e (< 1e-10); proof-vs-printed gap %.3e (> 1e-3)",
                  to_string(ctx.options.a2_variant).c_str(), worst, split)};
}

std::vector<int> even_sizes(bool quick) { return quick ? std::vector<int>{8, 10, 12} : std::vector<int>{8, 10, 12, 14, 16}; }

Outcome pn_scaling(const Context& ctx) {
  const std::vector<int> Ns = even_sizes(ctx.quick());
  const int draws = ctx.quick() ? 60 : 300;
  const PnScan s = pn_vs_phi_scan({8, 3, ctx.beta_run(), 0.5}, Ns, draws, ctx.estimator(), ctx.seed(6));
  const double dev = std::fabs(s.phi_hat - s.phi);
  return {dev < 3.0 * s.phi_hat_se,
          fmt("Phi %.8f, fit %.8f +- %.2e, |dev| = %.2f SE (< 3); %d draws/N; runs %d (z %.2f)", s.phi, s.phi_hat,
              s.phi_hat_se, dev / s.phi_hat_se, draws, s.runs, s.runs_z)};
}

Outcome self_averaging(const Context& ctx) {
  std::vector<int> Ns;
  if (ctx.quick()) {
    Ns = {8, 10, 12};
  } else {
    for (int N = 8; N <= 16; ++N) Ns.push_back(N);
  }
  EstimatorConfig cfg = ctx.estimator();
  cfg.antithetic = true;
  const int pairs = ctx.quick() ? 100 : 1000;
  const SelfAveragingScan s = self_averaging_scan({8, 3, ctx.beta_run(), 0.5}, Ns, pairs, cfg, ctx.seed(7));
  const bool slope_ok = s.slope >= -1.3 && s.slope <= -0.7;
  const bool bounded_ok = s.bounded_ratio < 5.0;
  double max_noise = 0.0;
  for (const auto& r : s.rows)
    if (r.stat == "mean_dev") max_noise = std::max(max_noise, r.N * r.estimate.std_err);
  return {slope_ok && bounded_ok,
          fmt("slope %.3f +- %.3f (in [-1.3, -0.7]); max/min N|nu(R-q)| = %.2f (< 5), largest N*SE %.1e; %d antithetic pairs",
              s.slope, s.slope_se, s.bounded_ratio, max_noise, pairs)};
}

Outcome clt(const Context& ctx) {
  const int N = ctx.quick() ? 12 : 16;
  const int draws = ctx.quick() ? 100 : 400;
  EstimatorConfig cfg = ctx.estimator();
  if (ctx.quick()) cfg.exact_samples = 2000;
  const CltCheck c = clt_moment_check({N, 3, ctx.beta_run(), 0.5}, 6, draws, cfg, ctx.seed(8));
  const NuEstimate& v2 = c.rows[1].estimate;
  const double z2 = std::fabs(N * v2.mean - c.clt_variance) / (N * v2.std_err);
  const bool kurt_ok = c.kurtosis.mean >= 2.5 && c.kurtosis.mean <= 3.5;
  double worst_odd = 0.0;
  std::string odd;
  for (int k : {1, 3, 5}) {
    const NuEstimate& e = c.rows[static_cast<std::size_t>(k - 1)].estimate;
    const double z = std::fabs(e.mean) / e.std_err;
    worst_odd = std::max(worst_odd, z);
    odd += fmt(" k=%d %.2e+-%.1e", k, e.mean, e.std_err);
  }
  const bool ok = z2 < 4.0 && kurt_ok && worst_odd < 4.0;
  return {ok, fmt("N nu2 %.5f vs %.5f (%.2f SE, < 4); kurtosis %.3f (in [2.5, 3.5]); odd moments worst %.1f SE (< 4):%s",
                  N * v2.mean, c.clt_variance, z2, c.kurtosis.mean, worst_odd, odd.c_str())};
}

Outcome delta_sq(const Context& ctx) {
  const int N = ctx.quick() ? 10 : 12;
  const int draws = ctx.quick() ? 50 : 200;
  EstimatorConfig cfg = ctx.estimator();
  if (ctx.quick()) cfg.exact_samples = 2000;
  const DeltaSqResult hot = delta_sq_estimate({N, 3, ctx.beta_run(), 0.5}, draws, cfg, ctx.seed(9));
  const DeltaSqResult zero = delta_sq_estimate({N, 3, 0.0, 0.5}, draws, cfg, derive_seed(ctx.seed(9), 1));
  const double z_hot = std::fabs(hot.estimate.mean - hot.prediction) / hot.estimate.std_err;
  const double z_zero = std::fabs(zero.estimate.mean - zero.prediction) / zero.estimate.std_err;
  return {z_hot < 4.0 && z_zero < 4.0,
          fmt("beta run: %.5f +- %.1e vs %.5f (%.1f SE); beta 0: %.5f +- %.1e vs %.5f (%.1f SE); limit 4 SE",
              hot.estimate.mean, hot.estimate.std_err, hot.prediction, z_hot, zero.estimate.mean, zero.estimate.std_err,
              zero.prediction, z_zero)};
}

Outcome t_identity(const Context& ctx) {
  const int instances = ctx.quick() ? 10 : 50;
  const ModelParams params{10, 3, ctx.beta_run(), 0.5};
  const double q = theory_q(params, ctx.options.quad_order);
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = derive_seed(ctx.seed(10), static_cast<std::uint64_t>(i));
    const Disorder d = sample_disorder(params, s);
    const GibbsTable table(d, params);
    const auto reps = exact_replica_sample(table, 2, derive_seed(s, 1));
    worst = std::max(worst, std::fabs(t_decomposition(table, params.p, reps[0], reps[1], q).residual()));
  }
  return {worst < 1e-10, fmt("max residual %.2e over %d instances (< 1e-10)", worst, instances)};
}

Outcome mcmc_validity(const Context& ctx) {
  const int ks[] = {1, 2};
  EstimatorConfig cfg = ctx.estimator();
  const int draws = ctx.quick() ? 10 : 40;
  if (ctx.quick()) cfg.mcmc_retained_sweeps = 3000;
  const auto cmp = compare_engines({12, 3, ctx.beta_run(), 0.5}, ks, draws, cfg, ctx.seed(11));
  double worst = 0.0;
  for (const auto& c : cmp) worst = std::max(worst, std::fabs(c.difference.mean) / c.difference.std_err);

  const ModelParams small{3, 2, 1.0, 0.5};
  const Disorder d = sample_disorder(small, derive_seed(ctx.seed(11), 1));
  const GibbsTable table(d, small);
  Chain chain = Chain::random_start(d, small, derive_seed(ctx.seed(11), 2));
  const int sweeps = ctx.quick() ? 100000 : 400000;
  for (int s = 0; s < 1000; ++s) chain.sweep(DynamicsKind::glauber);
  std::vector<double> counts(8, 0.0);
  for (int s = 0; s < sweeps; ++s) {
    chain.sweep(DynamicsKind::glauber);
    counts[chain.config().bits()] += 1.0;
  }
  double tv = 0.0;
  for (std::uint64_t b = 0; b < 8; ++b) tv += 0.5 * std::fabs(counts[b] / sweeps - table.probability(b));
  return {worst < 4.0 && tv < 0.01,
          fmt("N=12 Glauber minus exact: k=1 %.2e+-%.1e, k=2 %.2e+-%.1e, worst %.2f SE (< 4); N=3 TV %.4f (< 0.01)",
              cmp[0].difference.mean, cmp[0].difference.std_err, cmp[1].difference.mean, cmp[1].difference.std_err,
              worst, tv)};
}

Outcome cavity(const Context& ctx) {
  const int draws = ctx.quick() ? 100 : 500;
  const double ts[] = {0.25, 0.5, 0.75};
  const auto rows = cavity_derivative_check({10, 3, ctx.beta_run(), 0.5}, ts, draws, ctx.seed(12), 0.02,
                                            ctx.options.quad_order);
  double worst = 0.0;
  std::string parts;
  for (const auto& r : rows) {
    const double z = std::fabs(r.difference.mean) / r.difference.std_err;
    worst = std::max(worst, z);
    parts += fmt(" t=%.2f fd %.2e rhs %.2e (%.2f SE)", r.t, r.finite_difference.mean, r.formula_rhs.mean, z);
  }
  return {worst < 4.0, fmt("worst %.2f SE (< 4), %d draws:%s", worst, draws, parts.c_str())};
}

Outcome combinatorics(const Context&) {
  int mismatches = 0;
  long checked = 0;
  for (int N = 1; N <= 12; ++N) {
    for (int p = 1; p <= std::min(4, N); ++p) {
      Count a = 0;
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << N); ++m) a += std::popcount(m) == p;
      mismatches += card_A(N, p) != a;
      ++checked;
      for (int k = 1; k < N; ++k) {
        const std::uint64_t tail = ((std::uint64_t{1} << k) - 1) << (N - k);
        Count q = 0, q_tilde = 0;
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << N); ++m) {
          if (std::popcount(m) != p) continue;
          const int hits = std::popcount(m & tail);
          q += hits >= 1;
          q_tilde += hits == 1;
        }
        mismatches += card_Q(N, k, p) != q;
        mismatches += card_Q_tilde(N, k, p) != q_tilde;
        mismatches += card_Q_bar(N, k, p) != q - q_tilde;
        checked += 3;
      }
      Count repeated = 0, total = 1;
      for (int j = 0; j < p; ++j) total *= static_cast<Count>(N);
      for (Count t = 0; t < total; ++t) {
        std::uint64_t seen = 0;
        Count x = t;
        bool rep = false;
        for (int j = 0; j < p; ++j) {
          const std::uint64_t bit = std::uint64_t{1} << (x % static_cast<Count>(N));
          rep |= (seen & bit) != 0;
          seen |= bit;
          x /= static_cast<Count>(N);
        }
        repeated += rep;
      }
      mismatches += card_barNc(N, p) != repeated;
      ++checked;
    }
  }
  long bijections = 0;
  for (int w = 1; w <= 16; ++w) {
    for (int r = 1; r <= std::min(5, w); ++r) {
      Count index = 0;
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << w); ++m) {
        if (std::popcount(m) != r) continue;
        const IndexTuple t = unrank_colex(index, r, w);
        mismatches += t.mask() != m;
        mismatches += rank_colex(t) != index;
        ++index;
        ++bijections;
      }
      mismatches += index != binom(w, r);
    }
  }
  return {mismatches == 0, fmt("%d mismatches; %ld cardinalities, %ld rank/unrank pairs checked", mismatches, checked,
                               bijections)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "fixed-point residual and uniqueness", 1.0, fixed_point},
      {2, "q-hat identities", 1.0, q_hat_identities},
      {3, "free-energy identities", 5.0, free_energy},
      {4, "large-p limit of q", 0.0, large_p},
      {5, "beta=0 CLT variance closure", 0.0, closure},
      {6, "free-energy 1/N extrapolation", 600.0, pn_scaling},
      {7, "self-averaging scan", 600.0, self_averaging},
      {8, "overlap CLT moments", 0.0, clt},
      {9, "Delta^2 four-replica statistic", 0.0, delta_sq},
      {10, "T-decomposition identity", 0.0, t_identity},
      {11, "MCMC validity", 0.0, mcmc_validity},
      {12, "cavity derivative formula", 0.0, cavity},
      {13, "combinatorics against brute force", 10.0, combinatorics},
  };
  return list;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out) {
  const Context ctx{options};
  std::vector<CriterionResult> results;
  out << "acceptance level=" << to_string(options.level) << " seed=" << options.seed
      << " a2_variant=" << to_string(options.a2_variant) << '\n';
  for (const Criterion& c : criteria()) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), c.id) == options.only.end()) continue;
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    const auto start = std::chrono::steady_clock::now();
    try {
      const Outcome o = c.run(ctx);
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && r.seconds > c.time_limit) {
      r.passed = false;
      r.detail += fmt("; runtime %.1f s over the %.0f s budget", r.seconds, c.time_limit);
    }
    out << (r.passed ? "PASS" : "FAIL") << fmt(" [%2d] %-36s %8.2fs  ", r.id, r.name.c_str(), r.seconds) << r.detail
        << std::endl;
    results.push_back(std::move(r));
  }
  const auto passed = std::count_if(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
  out << passed << '/' << results.size() << " criteria passed\n";
  return results;
}

}  // namespace pspin
