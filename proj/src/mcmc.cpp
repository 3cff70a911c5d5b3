#include "pspin/mcmc.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>

#include "pspin/errors.hpp"

namespace pspin {

std::string to_string(DynamicsKind kind) { return kind == DynamicsKind::glauber ? "glauber" : "metropolis"; }

DynamicsKind parse_dynamics(const std::string& text) {
  if (text == "glauber") return DynamicsKind::glauber;
  if (text == "metropolis") return DynamicsKind::metropolis;
  throw UsageError("unknown dynamics '" + text + "' (expected glauber or metropolis)");
}

void SamplerConfig::validate() const {
  if (burn_in_sweeps < 0) throw UsageError("burn-in sweeps must be non-negative");
  if (sweeps <= burn_in_sweeps) throw UsageError("sweeps must exceed burn-in sweeps");
  if (thin < 1) throw UsageError("thin must be at least 1");
}

SamplerConfig SamplerConfig::with_defaults(int N, std::uint64_t seed, int retained) {
  SamplerConfig cfg;
  cfg.burn_in_sweeps = 100 * N;
  cfg.sweeps = cfg.burn_in_sweeps + retained;
  cfg.seed = seed;
  return cfg;
}

double flip_probability(DynamicsKind kind, double delta) noexcept {
  if (kind == DynamicsKind::glauber) return 1.0 / (1.0 + std::exp(-delta));
  return delta >= 0.0 ? 1.0 : std::exp(delta);
}

Chain::Chain(const Disorder& disorder, const ModelParams& params, SpinConfig initial, std::uint64_t seed)
    : disorder_(&disorder),
      params_(params),
      scale_(coupling_scale(params)),
      config_(initial),
      cache_(initial, disorder),
      rng_(seed) {
  if (initial.size() != params.N || disorder.N() != params.N || disorder.p() != params.p) {
    throw UsageError("chain: configuration, disorder and parameters disagree on N or p");
  }
}

Chain Chain::random_start(const Disorder& disorder, const ModelParams& params, std::uint64_t seed) {
  Xoshiro256 init(derive_seed(seed, 0x1417));
  std::uint64_t bits = init();
  if (params.N < 64) bits &= (std::uint64_t{1} << params.N) - 1;
  return Chain(disorder, params, SpinConfig(bits, params.N), seed);
}

bool Chain::update(int site, DynamicsKind kind) {
  const double delta = flip_delta(config_.spin(site), cache_[site], scale_, params_.h);
  if (!accept_flip(kind, delta, rng_.uniform())) return false;
  cache_.apply_flip(config_, site, *disorder_);
  return true;
}

void Chain::sweep(DynamicsKind kind, ScanOrder scan) {
  const int n = params_.N;
  if (scan == ScanOrder::sequential) {
    for (int i = 0; i < n; ++i) update(i, kind);
  } else {
    for (int i = 0; i < n; ++i) update(static_cast<int>(rng_.below(static_cast<std::uint64_t>(n))), kind);
  }
}

Autocorrelation autocorrelation(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw DegenerateSeriesError("autocorrelation: series shorter than 100");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> c(series.begin(), series.end());
  for (double& x : c) x -= mean;
  double c0 = 0.0;
  for (double x : c) c0 += x * x;
  if (!(c0 > 0.0)) throw DegenerateSeriesError("autocorrelation: constant series");

  constexpr double kWindowFactor = 6.0;
  double tau = 0.5;
  std::size_t m = 1;
  for (; m < n; ++m) {
    double ct = 0.0;
    for (std::size_t i = 0; i + m < n; ++i) ct += c[i] * c[i + m];
    tau += ct / c0;
    if (static_cast<double>(m) >= kWindowFactor * tau) break;
  }
  Autocorrelation out;
  out.tau = std::max(tau, 0.5);
  out.window = static_cast<int>(m);
  out.ess = static_cast<double>(n) / (2.0 * out.tau);
  return out;
}

double OverlapSeries::mean() const {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double OverlapSeries::standard_error() const {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean();
  double var = 0.0;
  for (double v : values) var += (v - m) * (v - m);
  var /= static_cast<double>(n - 1);
  const double tau = diagnostics ? diagnostics->tau : 0.5;
  return std::sqrt(var * 2.0 * tau / static_cast<double>(n));
}

ReplicaRun run_replicas(const Disorder& disorder, const ModelParams& params, int n_replicas, const SamplerConfig& cfg,
                        std::vector<std::pair<int, int>> pairs, const ReplicaObserver& observer) {
  params.validate();
  cfg.validate();
  if (n_replicas < 2) throw UsageError("run_replicas needs at least two replicas");
  if (pairs.empty()) {
    for (int a = 0; a < n_replicas; ++a)
      for (int b = a + 1; b < n_replicas; ++b) pairs.emplace_back(a, b);
  }
  for (auto [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= n_replicas || b >= n_replicas || a == b) throw UsageError("invalid replica pair");
  }

  std::vector<Chain> chains;
  chains.reserve(static_cast<std::size_t>(n_replicas));
  for (int r = 0; r < n_replicas; ++r) chains.push_back(Chain::random_start(disorder, params, derive_seed(cfg.seed, r)));

  ReplicaRun run;
  run.pairs.resize(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    run.pairs[k].first = pairs[k].first;
    run.pairs[k].second = pairs[k].second;
  }
  std::vector<SpinConfig> current(static_cast<std::size_t>(n_replicas));
  for (int s = 0; s < cfg.sweeps; ++s) {
    for (auto& c : chains) c.sweep(cfg.kind, cfg.scan);
    if (s < cfg.burn_in_sweeps || (s - cfg.burn_in_sweeps) % cfg.thin != 0) continue;
    run.sweep_index.push_back(s);
    for (int r = 0; r < n_replicas; ++r) current[static_cast<std::size_t>(r)] = chains[static_cast<std::size_t>(r)].config();
    for (auto& series : run.pairs) {
      series.values.push_back(
          overlap(current[static_cast<std::size_t>(series.first)], current[static_cast<std::size_t>(series.second)]));
    }
    if (observer) observer(s, current);
  }
  for (auto& series : run.pairs) {
    try {
      series.diagnostics = autocorrelation(series.values);
    } catch (const DegenerateSeriesError&) {
      series.diagnostics.reset();
    }
  }
  for (const auto& c : chains) run.final_configs.push_back(c.config());
  return run;
}

void write_series_csv(std::ostream& out, const ReplicaRun& run) {
  out << "sweep_index,pair_id,overlap\n";
  out.precision(17);
  for (std::size_t t = 0; t < run.sweep_index.size(); ++t) {
    for (const auto& series : run.pairs) {
      out << run.sweep_index[t] << ',' << series.first + 1 << '-' << series.second + 1 << ',' << series.values[t] << '\n';
    }
  }
}

}  // namespace pspin
