#pragma once

// Single-spin-flip Markov chains targeting the Gibbs measure exp(-H) / Z.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pspin/model.hpp"
#include "pspin/random.hpp"

namespace pspin {

enum class DynamicsKind { glauber, metropolis };
enum class ScanOrder { sequential, random };

std::string to_string(DynamicsKind kind);
DynamicsKind parse_dynamics(const std::string& text);

struct SamplerConfig {
  DynamicsKind kind = DynamicsKind::glauber;
  int sweeps = 2000;          // total, burn-in included
  int burn_in_sweeps = 1000;
  int thin = 1;
  std::uint64_t seed = 0;
  ScanOrder scan = ScanOrder::sequential;

  /// Throws UsageError unless sweeps > burn_in_sweeps >= 0 and thin >= 1.
  void validate() const;

  /// Defaults for N spins: burn-in 100 N, then `retained` thinned sweeps.
  static SamplerConfig with_defaults(int N, std::uint64_t seed, int retained = 10000);
};

/// Flip probability given the change of -H and a uniform u in [0, 1).
inline bool accept_flip(DynamicsKind kind, double delta, double u) noexcept;

/// Probability that a single proposed flip with change `delta` of -H is accepted.
double flip_probability(DynamicsKind kind, double delta) noexcept;

/// One chain: configuration, local-field cache and private rng.
class Chain {
 public:
  Chain(const Disorder& disorder, const ModelParams& params, SpinConfig initial, std::uint64_t seed);

  /// Chain started from a uniformly random configuration drawn from its own stream.
  static Chain random_start(const Disorder& disorder, const ModelParams& params, std::uint64_t seed);

  /// Heat-bath or Metropolis update of one site. Returns true if the spin flipped.
  bool update(int site, DynamicsKind kind);

  /// N single-site updates: sites 0..N-1 in order, or N uniformly chosen sites.
  void sweep(DynamicsKind kind, ScanOrder scan = ScanOrder::sequential);

  const SpinConfig& config() const noexcept { return config_; }
  const LocalFieldCache& cache() const noexcept { return cache_; }
  Xoshiro256& rng() noexcept { return rng_; }

 private:
  const Disorder* disorder_;
  ModelParams params_;
  double scale_;
  SpinConfig config_;
  LocalFieldCache cache_;
  Xoshiro256 rng_;
};

struct Autocorrelation {
  double tau = 0.5;  // integrated autocorrelation time, >= 0.5
  double ess = 0.0;  // length / (2 tau)
  int window = 0;
};

/// Self-consistent window (lag M with M >= 6 tau(M)). Throws DegenerateSeriesError
/// for series shorter than 100 or with zero variance.
Autocorrelation autocorrelation(std::span<const double> series);

struct OverlapSeries {
  int first = 0;
  int second = 1;
  std::vector<double> values;
  std::optional<Autocorrelation> diagnostics;  // empty for degenerate series

  double mean() const;
  /// Standard error of the mean using the integrated autocorrelation time (iid error if degenerate).
  double standard_error() const;
};

struct ReplicaRun {
  std::vector<int> sweep_index;  // retained sweeps, shared by every pair
  std::vector<OverlapSeries> pairs;
  std::vector<SpinConfig> final_configs;
};

/// Called on every retained sweep with the current replica configurations.
using ReplicaObserver = std::function<void(int sweep, std::span<const SpinConfig> replicas)>;

/// n independent chains on one disorder; replica r uses stream derive_seed(cfg.seed, r).
/// `pairs` empty means every pair (a, b) with a < b, in lexicographic order.
ReplicaRun run_replicas(const Disorder& disorder, const ModelParams& params, int n_replicas, const SamplerConfig& cfg,
                        std::vector<std::pair<int, int>> pairs = {}, const ReplicaObserver& observer = {});

/// CSV with header sweep_index,pair_id,overlap; pair_id is "a-b" with 1-based replica labels.
void write_series_csv(std::ostream& out, const ReplicaRun& run);

inline bool accept_flip(DynamicsKind kind, double delta, double u) noexcept {
  return u < flip_probability(kind, delta);
}

}  // namespace pspin
