#include "pspin/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "pspin/errors.hpp"

namespace pspin {

namespace {

void require_gate(int N, int limit, const char* what) {
  if (N > limit) {
    throw ResourceLimitError(std::string(what) + ": N = " + std::to_string(N) + " exceeds the exact gate of " +
                             std::to_string(limit));
  }
}

}  // namespace

ExactSummary exact_summary(const Disorder& disorder, const ModelParams& params, bool want_two_point,
                           const ExactGates& gates) {
  params.validate();
  require_gate(params.N, want_two_point ? std::min(gates.max_N, gates.max_N_two_point) : gates.max_N,
               "exact_summary");
  const int n = params.N;
  const auto un = static_cast<std::size_t>(n);

  // Streaming log-sum-exp: all accumulators are stored relative to exp(running_max).
  double running_max = -std::numeric_limits<double>::infinity();
  double z = 0.0;
  std::vector<double> s1(un, 0.0);
  std::vector<double> s2(want_two_point ? un * un : 0, 0.0);
  std::vector<double> spins(un);

  gray_code_sweep(disorder, params, [&](const SpinConfig& config, double neg_h) {
    if (neg_h > running_max) {
      const double rescale = std::exp(running_max - neg_h);
      z *= rescale;
      for (auto& v : s1) v *= rescale;
      for (auto& v : s2) v *= rescale;
      running_max = neg_h;
    }
    const double w = std::exp(neg_h - running_max);
    z += w;
    for (int i = 0; i < n; ++i) {
      spins[static_cast<std::size_t>(i)] = config.spin(i);
      s1[static_cast<std::size_t>(i)] += w * spins[static_cast<std::size_t>(i)];
    }
    if (want_two_point) {
      for (std::size_t i = 0; i < un; ++i) {
        const double wi = w * spins[i];
        double* row = s2.data() + i * un;
        for (std::size_t j = i + 1; j < un; ++j) row[j] += wi * spins[j];
      }
    }
  });

  ExactSummary out;
  out.N = n;
  out.log_Z = running_max + std::log(z);
  out.one_point.resize(un);
  for (std::size_t i = 0; i < un; ++i) out.one_point[i] = s1[i] / z;
  if (want_two_point) {
    out.two_point.assign(un * un, 1.0);
    for (std::size_t i = 0; i < un; ++i) {
      for (std::size_t j = i + 1; j < un; ++j) {
        const double c = s2[i * un + j] / z;
        out.two_point[i * un + j] = c;
        out.two_point[j * un + i] = c;
      }
    }
  }
  if (!std::isfinite(out.log_Z)) throw NumericalError("log Z is not finite");
  return out;
}

double overlap_moment_exact(const ExactSummary& summary, int k) {
  const double n = summary.N;
  if (k == 1) {
    double sum = 0.0;
    for (double m : summary.one_point) sum += m * m;
    return sum / n;
  }
  if (k == 2) {
    if (!summary.has_two_point()) throw UsageError("second overlap moment needs two-point correlations");
    double sum = 0.0;
    for (double c : summary.two_point) sum += c * c;
    return sum / (n * n);
  }
  throw UsageError("overlap_moment_exact supports k = 1 or 2; use exact replica sampling for k >= 3");
}

GibbsTable::GibbsTable(const Disorder& disorder, const ModelParams& params, const ExactGates& gates) : N_(params.N) {
  params.validate();
  require_gate(params.N, gates.max_N_table, "GibbsTable");
  const std::size_t total = std::size_t{1} << N_;
  probability_.resize(total);
  double running_max = -std::numeric_limits<double>::infinity();
  gray_code_sweep(disorder, params, [&](const SpinConfig& config, double neg_h) {
    probability_[static_cast<std::size_t>(config.bits())] = neg_h;
    running_max = std::max(running_max, neg_h);
  });
  double z = 0.0;
  for (double v : probability_) z += std::exp(v - running_max);
  log_Z_ = running_max + std::log(z);
  for (auto& v : probability_) v = std::exp(v - log_Z_);
  cdf_.resize(total);
  double acc = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    acc += probability_[i];
    cdf_[i] = acc;
  }
  // Normalize away the residual rounding so the last entry is exactly 1.
  for (auto& c : cdf_) c /= acc;
}

SpinConfig GibbsTable::sample(Xoshiro256& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return SpinConfig(static_cast<std::uint64_t>(it - cdf_.begin()), N_);
}

double GibbsTable::parity_expectation(std::uint64_t mask) const {
  double sum = 0.0;
  const std::size_t total = probability_.size();
  for (std::size_t bits = 0; bits < total; ++bits) {
    const int sign = 1 - 2 * (std::popcount(~static_cast<std::uint64_t>(bits) & mask) & 1);
    sum += sign * probability_[bits];
  }
  return sum;
}

std::vector<SpinConfig> exact_replica_sample(const GibbsTable& table, std::size_t count, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  std::vector<SpinConfig> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(table.sample(rng));
  return out;
}

TDecomposition t_decomposition(const GibbsTable& table, int p, const SpinConfig& first, const SpinConfig& second,
                               double q, const ExactGates& gates) {
  const int n = table.N();
  if (p < 2 || first.size() != n || second.size() != n) throw UsageError("t_decomposition: inconsistent shapes");
  const double tuples = std::pow(static_cast<double>(n), p - 1);
  if (tuples * std::ldexp(1.0, n) > static_cast<double>(gates.t_budget)) {
    throw ResourceLimitError("t_decomposition: N^(p-1) * 2^N = " + std::to_string(tuples * std::ldexp(1.0, n)) +
                             " exceeds the budget");
  }

  // Each (p-1)-tuple with repetition reduces to the set of indices of odd multiplicity.
  std::unordered_map<std::uint64_t, double> b_cache;
  std::vector<int> digits(static_cast<std::size_t>(p - 1), 0);
  double pair = 0.0;
  double single_first = 0.0;
  double single_second = 0.0;
  double b_sq = 0.0;
  for (;;) {
    std::uint64_t mask = 0;
    for (int d : digits) mask ^= std::uint64_t{1} << d;
    auto [it, inserted] = b_cache.try_emplace(mask, 0.0);
    if (inserted) it->second = table.parity_expectation(mask);
    const double b = it->second;
    const double eta1 = first.parity(mask);
    const double eta2 = second.parity(mask);
    pair += (eta1 - b) * (eta2 - b);
    single_first += (eta1 - b) * b;
    single_second += (eta2 - b) * b;
    b_sq += b * b;

    int pos = 0;
    while (pos < p - 1 && ++digits[static_cast<std::size_t>(pos)] == n) digits[static_cast<std::size_t>(pos++)] = 0;
    if (pos == p - 1) break;
  }

  const double q_pow = std::pow(q, p - 1);
  TDecomposition out;
  out.t_pair = pair / tuples;
  out.t_first = single_first / tuples;
  out.t_second = single_second / tuples;
  out.t_const = b_sq / tuples - q_pow;
  out.lhs = std::pow(overlap(first, second), p - 1) - q_pow;
  return out;
}

double pn_sample(const ModelParams& params, std::uint64_t seed, const ExactGates& gates) {
  const Disorder disorder = sample_disorder(params, seed);
  return exact_summary(disorder, params, false, gates).log_Z / params.N;
}

}  // namespace pspin
