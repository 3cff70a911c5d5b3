#include "pspin/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pspin/errors.hpp"
#include "pspin/parallel.hpp"
#include "pspin/random.hpp"

namespace pspin {

NuEstimate jackknife(const std::vector<std::vector<double>>& rows,
                     const std::function<double(std::span<const double>)>& stat, std::string source) {
  NuEstimate est;
  est.source = std::move(source);
  est.n_disorder = static_cast<int>(rows.size());
  if (rows.empty()) throw UsageError("jackknife needs at least one row");
  const std::size_t n = rows.size();
  const std::size_t m = rows.front().size();
  std::vector<double> total(m, 0.0);
  for (const auto& r : rows) {
    if (r.size() != m) throw UsageError("jackknife rows have different widths");
    for (std::size_t j = 0; j < m; ++j) total[j] += r[j];
  }
  std::vector<double> mean(m);
  for (std::size_t j = 0; j < m; ++j) mean[j] = total[j] / static_cast<double>(n);
  est.mean = stat(mean);
  if (n < 2) {
    est.std_err = std::numeric_limits<double>::infinity();
    return est;
  }
  std::vector<double> loo(n), buf(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) buf[j] = (total[j] - rows[i][j]) / static_cast<double>(n - 1);
    loo[i] = stat(buf);
  }
  double avg = 0.0;
  for (double v : loo) avg += v;
  avg /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : loo) ss += (v - avg) * (v - avg);
  est.std_err = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
  return est;
}

NuEstimate jackknife_mean(std::span<const double> values, std::string source) {
  std::vector<std::vector<double>> rows;
  rows.reserve(values.size());
  for (double v : values) rows.push_back({v});
  return jackknife(rows, [](std::span<const double> x) { return x[0]; }, std::move(source));
}

std::string to_string(Engine engine) { return engine == Engine::exact ? "exact" : "mcmc"; }

Engine parse_engine(const std::string& text) {
  if (text == "exact") return Engine::exact;
  if (text == "mcmc") return Engine::mcmc;
  throw UsageError("unknown engine '" + text + "' (expected exact or mcmc)");
}

double theory_q(const ModelParams& params, int quad_order) {
  return solve_q({params.p, params.beta, params.h}, cached_rule(quad_order)).principal;
}

namespace {

using Row = std::vector<double>;
using DrawFn = std::function<Row(const Disorder&, std::uint64_t inner_seed)>;

std::uint64_t draw_seed(std::uint64_t seed, int N, std::size_t index) {
  return derive_seed(seed, static_cast<std::uint64_t>(N), index);
}

// One row per independent sample; with antithetic pairing a sample averages g and -g.
std::vector<Row> collect_rows(const ModelParams& params, int n_disorder, const EstimatorConfig& cfg,
                              std::uint64_t seed, const DrawFn& fn) {
  params.validate();
  if (n_disorder < 1) throw UsageError("n_disorder must be positive");
  return parallel_map(static_cast<std::size_t>(n_disorder), [&](std::size_t i) {
    const std::uint64_t s = draw_seed(seed, params.N, i);
    const Disorder d = sample_disorder(params, s);
    Row row = fn(d, derive_seed(s, 1));
    if (cfg.antithetic) {
      const Row mirror = fn(d.scaled(-1.0), derive_seed(s, 2));
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = 0.5 * (row[j] + mirror[j]);
    }
    return row;
  });
}

std::string source_tag(const EstimatorConfig& cfg, bool sampled) {
  std::string tag;
  if (cfg.engine == Engine::exact) {
    tag = sampled ? "exact-sampled(" + std::to_string(cfg.exact_samples) + ")" : "exact";
  } else {
    tag = "mcmc(" + std::to_string(cfg.mcmc_replicas) + "x" + std::to_string(cfg.mcmc_retained_sweeps) + ")";
  }
  if (cfg.antithetic) tag += "+antithetic";
  return tag;
}

double ipow(double x, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v *= x;
  return v;
}

SamplerConfig sampler_for(const ModelParams& params, const EstimatorConfig& cfg, std::uint64_t seed) {
  SamplerConfig s = SamplerConfig::with_defaults(params.N, seed, cfg.mcmc_retained_sweeps);
  s.kind = cfg.dynamics;
  return s;
}

void check_quality(const ReplicaRun& run, double min_ess) {
  for (const auto& series : run.pairs) {
    if (!series.diagnostics) throw QualityError("mcmc: overlap series is degenerate");
    if (series.diagnostics->ess < min_ess) {
      throw QualityError("mcmc: effective sample size " + std::to_string(series.diagnostics->ess) +
                         " below threshold " + std::to_string(min_ess));
    }
  }
}

Row exact_moments(const Disorder& d, const ModelParams& params, std::span<const int> ks, double q,
                  const EstimatorConfig& cfg, std::uint64_t inner_seed) {
  bool need_two = false, need_samples = false;
  for (int k : ks) {
    if (k < 0) throw UsageError("moment order must be non-negative");
    need_two |= k == 2;
    need_samples |= k >= 3;
  }
  double r1 = 0.0, r2 = 0.0;
  if (std::any_of(ks.begin(), ks.end(), [](int k) { return k == 1 || k == 2; })) {
    const ExactSummary s = exact_summary(d, params, need_two, cfg.gates);
    r1 = overlap_moment_exact(s, 1);
    if (need_two) r2 = overlap_moment_exact(s, 2);
  }
  std::vector<double> sampled;
  if (need_samples) {
    const GibbsTable table(d, params, cfg.gates);
    const auto configs = exact_replica_sample(table, 2 * cfg.exact_samples, inner_seed);
    sampled.reserve(cfg.exact_samples);
    for (std::size_t i = 0; i < cfg.exact_samples; ++i) sampled.push_back(overlap(configs[2 * i], configs[2 * i + 1]) - q);
  }
  Row row;
  for (int k : ks) {
    if (k == 0) {
      row.push_back(1.0);
    } else if (k == 1) {
      row.push_back(r1 - q);
    } else if (k == 2) {
      row.push_back(r2 - 2.0 * q * r1 + q * q);
    } else {
      double s = 0.0;
      for (double x : sampled) s += ipow(x, k);
      row.push_back(s / static_cast<double>(sampled.size()));
    }
  }
  return row;
}

Row mcmc_moments(const Disorder& d, const ModelParams& params, std::span<const int> ks, double q,
                 const EstimatorConfig& cfg, std::uint64_t inner_seed) {
  std::vector<double> sums(ks.size(), 0.0);
  double count = 0.0;
  const ReplicaRun run = run_replicas(d, params, cfg.mcmc_replicas, sampler_for(params, cfg, inner_seed), {}, {});
  check_quality(run, cfg.min_ess);
  for (const auto& series : run.pairs) {
    for (double r : series.values) {
      const double x = r - q;
      for (std::size_t j = 0; j < ks.size(); ++j) sums[j] += ipow(x, ks[j]);
      count += 1.0;
    }
  }
  Row row(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) row[j] = sums[j] / count;
  return row;
}

Row moments_for(const Disorder& d, const ModelParams& params, std::span<const int> ks, double q,
                const EstimatorConfig& cfg, std::uint64_t inner_seed) {
  return cfg.engine == Engine::exact ? exact_moments(d, params, ks, q, cfg, inner_seed)
                                     : mcmc_moments(d, params, ks, q, cfg, inner_seed);
}

NuEstimate column(const std::vector<Row>& rows, std::size_t j, const std::string& source) {
  return jackknife(rows, [j](std::span<const double> x) { return x[j]; }, source);
}

// Least-squares fit y = a + b x with weights w; coefficients are linear in y, so the
// standard errors follow by propagating the per-point errors.
struct LinearFit {
  double a = 0.0, b = 0.0, a_se = 0.0, b_se = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> se,
                     std::span<const double> w) {
  const std::size_t n = x.size();
  if (n < 2) throw UsageError("linear fit needs at least two points");
  double sw = 0, sx = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sxx += w[i] * x[i] * x[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw NumericalError("linear fit is degenerate");
  LinearFit fit;
  double va = 0, vb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ca = w[i] * (sxx - sx * x[i]) / det;
    const double cb = w[i] * (sw * x[i] - sx) / det;
    fit.a += ca * y[i];
    fit.b += cb * y[i];
    va += ca * ca * se[i] * se[i];
    vb += cb * cb * se[i] * se[i];
  }
  fit.a_se = std::sqrt(va);
  fit.b_se = std::sqrt(vb);
  return fit;
}

}  // namespace

std::map<int, NuEstimate> nu_overlap_moments(const ModelParams& params, std::span<const int> ks, int n_disorder,
                                             const EstimatorConfig& cfg, std::uint64_t seed) {
  const double q = theory_q(params, cfg.quad_order);
  const auto rows = collect_rows(params, n_disorder, cfg, seed, [&](const Disorder& d, std::uint64_t s) {
    return moments_for(d, params, ks, q, cfg, s);
  });
  std::map<int, NuEstimate> out;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const bool sampled = ks[j] >= 3;
    out[ks[j]] = column(rows, j, source_tag(cfg, sampled));
  }
  return out;
}

SelfAveragingScan self_averaging_scan(const ModelParams& base, std::span<const int> N_list, int n_disorder,
                                      const EstimatorConfig& cfg, std::uint64_t seed) {
  if (N_list.size() < 2) throw UsageError("a scan needs at least two sizes");
  const TheorySolution sol = solve_theory({base.p, base.beta, base.h}, cfg.quad_order);
  SelfAveragingScan scan;
  std::vector<double> lx, ly, lse, w;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const int ks[] = {1, 2};
  int prev = 0;
  for (int N : N_list) {
    if (N <= prev) throw UsageError("scan sizes must be strictly increasing");
    prev = N;
    ModelParams params = base;
    params.N = N;
    const auto nu = nu_overlap_moments(params, ks, n_disorder, cfg, seed);
    const NuEstimate& e1 = nu.at(1);
    const NuEstimate& e2 = nu.at(2);
    scan.rows.push_back({N, "mean_dev", e1, 0.0, N * std::fabs(e1.mean)});
    scan.rows.push_back({N, "second", e2, sol.clt_var / N, N * e2.mean});
    lo = std::min(lo, N * std::fabs(e1.mean));
    hi = std::max(hi, N * std::fabs(e1.mean));
    if (!(e2.mean > 0.0)) throw NumericalError("self_averaging_scan: non-positive second moment");
    lx.push_back(std::log(static_cast<double>(N)));
    ly.push_back(std::log(e2.mean));
    lse.push_back(e2.std_err / e2.mean);
    w.push_back(1.0);
  }
  const LinearFit fit = linear_fit(lx, ly, lse, w);
  scan.slope = fit.b;
  scan.slope_se = fit.b_se;
  scan.bounded_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return scan;
}

double delta_statistic(const SpinConfig& s1, const SpinConfig& s2, const SpinConfig& s3, const SpinConfig& s4, int p) {
  const int e = p - 1;
  return ipow(overlap(s1, s3), e) - ipow(overlap(s1, s4), e) - ipow(overlap(s2, s3), e) + ipow(overlap(s2, s4), e);
}

DeltaSqResult delta_sq_estimate(const ModelParams& params, int n_disorder, const EstimatorConfig& cfg,
                                std::uint64_t seed) {
  const TheorySolution sol = solve_theory({params.p, params.beta, params.h}, cfg.quad_order);
  const auto rows = collect_rows(params, n_disorder, cfg, seed, [&](const Disorder& d, std::uint64_t s) -> Row {
    double sum = 0.0, count = 0.0;
    if (cfg.engine == Engine::exact) {
      const GibbsTable table(d, params, cfg.gates);
      const auto c = exact_replica_sample(table, 4 * cfg.exact_samples, s);
      for (std::size_t i = 0; i < cfg.exact_samples; ++i) {
        const double x = delta_statistic(c[4 * i], c[4 * i + 1], c[4 * i + 2], c[4 * i + 3], params.p);
        sum += x * x;
        count += 1.0;
      }
    } else {
      const ReplicaRun run = run_replicas(d, params, 4, sampler_for(params, cfg, s), {},
                                          [&](int, std::span<const SpinConfig> r) {
                                            const double x = delta_statistic(r[0], r[1], r[2], r[3], params.p);
                                            sum += x * x;
                                            count += 1.0;
                                          });
      check_quality(run, cfg.min_ess);
    }
    return {sum / count};
  });
  DeltaSqResult out;
  out.estimate = column(rows, 0, source_tag(cfg, true));
  out.prediction = delta_sq_prediction(params.N, sol);
  return out;
}

CltCheck clt_moment_check(const ModelParams& params, int k_max, int n_disorder, const EstimatorConfig& cfg,
                          std::uint64_t seed) {
  if (k_max < 1 || k_max > 6) throw UsageError("k_max must be in [1, 6]");
  const TheorySolution sol = solve_theory({params.p, params.beta, params.h}, cfg.quad_order);
  std::vector<int> ks;
  for (int k = 1; k <= k_max; ++k) ks.push_back(k);
  const double q = sol.q;
  const auto rows = collect_rows(params, n_disorder, cfg, seed, [&](const Disorder& d, std::uint64_t s) {
    return moments_for(d, params, ks, q, cfg, s);
  });
  CltCheck out;
  out.clt_variance = sol.clt_var;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    out.rows.push_back({ks[j], column(rows, j, source_tag(cfg, ks[j] >= 3)), clt_moment_prediction(ks[j], params.N, sol)});
  }
  if (k_max >= 4) {
    out.kurtosis = jackknife(rows, [](std::span<const double> x) { return x[3] / (x[1] * x[1]); }, source_tag(cfg, true));
  }
  return out;
}

PnScan pn_vs_phi_scan(const ModelParams& base, std::span<const int> N_list, int n_disorder, const EstimatorConfig& cfg,
                      std::uint64_t seed) {
  if (N_list.size() < 2) throw UsageError("a scan needs at least two sizes");
  const ThermoParams tp{base.p, base.beta, base.h};
  const QuadratureRule& rule = cached_rule(cfg.quad_order);
  PnScan scan;
  scan.phi = rs_free_energy(tp, solve_q(tp, rule).principal, rule);
  std::vector<double> x, y, se;
  int prev = 0;
  for (int N : N_list) {
    if (N <= prev) throw UsageError("scan sizes must be strictly increasing");
    prev = N;
    ModelParams params = base;
    params.N = N;
    EstimatorConfig exact_cfg = cfg;
    exact_cfg.engine = Engine::exact;
    const auto rows = collect_rows(params, n_disorder, exact_cfg, seed, [&](const Disorder& d, std::uint64_t) -> Row {
      return {exact_summary(d, params, false, cfg.gates).log_Z / N};
    });
    const NuEstimate e = column(rows, 0, source_tag(exact_cfg, false));
    scan.rows.push_back({N, "p_N", e, scan.phi, N * (e.mean - scan.phi)});
    x.push_back(1.0 / N);
    y.push_back(e.mean);
    se.push_back(e.std_err);
  }
  const bool weighted = std::all_of(se.begin(), se.end(), [](double s) { return s > 0.0; });
  std::vector<double> w(x.size(), 1.0);
  if (weighted)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / (se[i] * se[i]);
  const LinearFit fit = linear_fit(x, y, se, w);
  scan.phi_hat = fit.a;
  scan.phi_hat_se = fit.a_se;
  scan.slope_c = fit.b;

  int n_pos = 0, n_neg = 0, runs = 0, last = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.a + fit.b * x[i]);
    const int sign = r > 0.0 ? 1 : (r < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    (sign > 0 ? n_pos : n_neg)++;
    if (sign != last) ++runs;
    last = sign;
  }
  scan.runs = runs;
  const double n = n_pos + n_neg;
  if (n_pos > 0 && n_neg > 0 && n > 1) {
    const double a = 2.0 * n_pos * n_neg;
    const double expected = a / n + 1.0;
    const double var = a * (a - n) / (n * n * (n - 1.0));
    scan.runs_z = var > 0.0 ? (runs - expected) / std::sqrt(var) : 0.0;
  }
  scan.runs_pass = std::fabs(scan.runs_z) < 1.96;
  return scan;
}

std::vector<EngineComparison> compare_engines(const ModelParams& params, std::span<const int> ks, int n_disorder,
                                              const EstimatorConfig& cfg, std::uint64_t seed) {
  const double q = theory_q(params, cfg.quad_order);
  EstimatorConfig exact_cfg = cfg, mcmc_cfg = cfg;
  exact_cfg.engine = Engine::exact;
  mcmc_cfg.engine = Engine::mcmc;
  const std::size_t m = ks.size();
  const auto rows = collect_rows(params, n_disorder, cfg, seed, [&](const Disorder& d, std::uint64_t s) {
    Row row = exact_moments(d, params, ks, q, exact_cfg, derive_seed(s, 0));
    const Row mc = mcmc_moments(d, params, ks, q, mcmc_cfg, derive_seed(s, 1));
    row.insert(row.end(), mc.begin(), mc.end());
    return row;
  });
  std::vector<EngineComparison> out;
  for (std::size_t j = 0; j < m; ++j) {
    EngineComparison c;
    c.k = ks[j];
    c.exact = column(rows, j, source_tag(exact_cfg, ks[j] >= 3));
    c.mcmc = column(rows, m + j, source_tag(mcmc_cfg, true));
    c.difference = jackknife(rows, [j, m](std::span<const double> x) { return x[m + j] - x[j]; }, "mcmc-minus-exact");
    out.push_back(std::move(c));
  }
  return out;
}

void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows) {
  out << "N,stat,estimate,std_err,prediction,scaled\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.N << ',' << r.stat << ',' << r.estimate.mean << ',' << r.estimate.std_err << ',' << r.prediction << ','
        << r.scaled << '\n';
  }
}

}  // namespace pspin
