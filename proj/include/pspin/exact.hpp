#pragma once

// Exact computations over all 2^N configurations: partition function,
// correlations, exact Gibbs sampling, and the overlap T-decomposition.

#include <cstdint>
#include <span>
#include <vector>

#include "pspin/model.hpp"
#include "pspin/random.hpp"

namespace pspin {

/// Budget gates for the 2^N engines. Exceeding a gate throws ResourceLimitError.
struct ExactGates {
  int max_N = 24;             // Gray-code sweep for log Z and one-point correlations
  int max_N_two_point = 20;   // sweep with N x N two-point accumulation
  int max_N_table = 20;       // full 2^N weight table (exact sampling)
  std::uint64_t t_budget = std::uint64_t{1} << 20;  // N^(p-1) * 2^N for the T-decomposition
};

struct ExactSummary {
  int N = 0;
  double log_Z = 0.0;
  std::vector<double> one_point;  // m_i = <sigma_i>
  std::vector<double> two_point;  // row-major <sigma_i sigma_j>, empty unless requested

  bool has_two_point() const noexcept { return !two_point.empty(); }
  double correlation(int i, int j) const { return two_point[static_cast<std::size_t>(i * N + j)]; }
};

/// Visits every configuration in Gray-code order (one flip per step) with its -H value.
/// The visitor receives (const SpinConfig&, double neg_h).
template <class Visitor>
void gray_code_sweep(const Disorder& disorder, const ModelParams& params, Visitor&& visit);

/// log Z and one-point (optionally two-point) Gibbs correlations from one Gray-code sweep
/// with streaming log-sum-exp.
ExactSummary exact_summary(const Disorder& disorder, const ModelParams& params, bool want_two_point,
                           const ExactGates& gates = {});

/// <R_{1,2}> (k = 1) or <R_{1,2}^2> (k = 2) from correlation sums.
/// k = 2 needs the two-point matrix; otherwise UsageError.
double overlap_moment_exact(const ExactSummary& summary, int k);

/// The exact Gibbs law as a 2^N table, indexed by SpinConfig::bits().
class GibbsTable {
 public:
  GibbsTable(const Disorder& disorder, const ModelParams& params, const ExactGates& gates = {});

  int N() const noexcept { return N_; }
  double log_Z() const noexcept { return log_Z_; }
  double probability(std::uint64_t bits) const { return probability_[static_cast<std::size_t>(bits)]; }
  std::span<const double> probabilities() const noexcept { return probability_; }

  /// One independent exact draw.
  SpinConfig sample(Xoshiro256& rng) const;

  /// <prod_{i in mask} sigma_i>.
  double parity_expectation(std::uint64_t mask) const;

 private:
  int N_;
  double log_Z_;
  std::vector<double> probability_;
  std::vector<double> cdf_;
};

/// `count` independent exact Gibbs draws from the stream keyed by `seed`.
std::vector<SpinConfig> exact_replica_sample(const GibbsTable& table, std::size_t count, std::uint64_t seed);

/// Components of R_{l,l'}^(p-1) - q^(p-1) split around the Gibbs means b_J, J over all (p-1)-tuples.
struct TDecomposition {
  double t_pair = 0.0;    // T_{l,l'}
  double t_first = 0.0;   // T_l
  double t_second = 0.0;  // T_{l'}
  double t_const = 0.0;   // T
  double lhs = 0.0;       // R_{l,l'}^(p-1) - q^(p-1)

  double residual() const noexcept { return t_pair + t_first + t_second + t_const - lhs; }
};

TDecomposition t_decomposition(const GibbsTable& table, int p, const SpinConfig& first, const SpinConfig& second,
                               double q, const ExactGates& gates = {});

/// (1/N) log Z_N for the disorder drawn from `seed`.
double pn_sample(const ModelParams& params, std::uint64_t seed, const ExactGates& gates = {});

// ---------------------------------------------------------------------------

template <class Visitor>
void gray_code_sweep(const Disorder& disorder, const ModelParams& params, Visitor&& visit) {
  const int n = params.N;
  SpinConfig config(0, n);
  LocalFieldCache cache(config, disorder);
  const double scale = coupling_scale(params);
  const auto fresh = [&] {
    double coupling_sum = 0.0;
    for (int i = 0; i < n; ++i) coupling_sum += config.spin(i) * cache[i];
    return scale * coupling_sum / params.p + params.h * config.magnetization();
  };
  double neg_h = fresh();
  visit(static_cast<const SpinConfig&>(config), neg_h);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int site = std::countr_zero(k);
    neg_h += flip_delta(config.spin(site), cache[site], scale, params.h);
    cache.apply_flip(config, site, disorder);
    if ((k & 0xfff) == 0) neg_h = fresh();  // re-anchor against accumulated rounding
    visit(static_cast<const SpinConfig&>(config), neg_h);
  }
}

}  // namespace pspin
