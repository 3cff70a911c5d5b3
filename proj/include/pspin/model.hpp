#pragma once

// p-spin Hamiltonian with Gaussian couplings and a positive external field:
//
//   -H(sigma) = beta * u_N * sum_{J in A_N^p} g_J prod_{j in J} sigma_j + h * sum_i sigma_i
//
// Sites are 0-based in this API (bit i of a SpinConfig is site i + 1 of the
// 1-based IndexTuple convention).

#include <bit>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pspin {

/// Largest N representable by a bit-packed SpinConfig.
inline constexpr int kMaxSpins = 64;

struct ModelParams {
  int N = 2;
  int p = 2;
  double beta = 0.0;
  double h = 0.5;

  /// Throws UsageError unless 2 <= p <= N <= 64, p <= 8, beta >= 0 and h > 0 (all finite).
  void validate() const;
};

/// One configuration sigma in {-1, +1}^N; bit i set <=> sigma_{i+1} = +1.
class SpinConfig {
 public:
  SpinConfig() = default;
  SpinConfig(std::uint64_t bits, int n);

  static SpinConfig all_up(int n);

  int size() const noexcept { return n_; }
  std::uint64_t bits() const noexcept { return bits_; }

  int spin(int site) const noexcept { return ((bits_ >> site) & 1U) ? 1 : -1; }
  void flip(int site) noexcept { bits_ ^= std::uint64_t{1} << site; }

  /// prod_{j in mask} sigma_j via the parity of down spins in the mask.
  int parity(std::uint64_t mask) const noexcept {
    return 1 - 2 * (std::popcount(~bits_ & mask) & 1);
  }

  /// Sum of spins: (#up - #down).
  int magnetization() const noexcept { return 2 * std::popcount(bits_) - n_; }

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  std::uint64_t bits_ = 0;
  int n_ = 0;
};

/// Overlap R = (1/N) sum_i sigma^1_i sigma^2_i = (N - 2 hamming) / N.
double overlap(const SpinConfig& a, const SpinConfig& b);

/// Colex-ordered coupling masks for A_N^p and, per site, the couplings that contain it.
/// Immutable after construction; share via shared_ptr.
class CouplingIndex {
 public:
  struct Incidence {
    std::uint32_t rank;
    std::uint64_t others;  // mask of the coupling with the site removed
  };

  CouplingIndex(int N, int p);

  int N() const noexcept { return N_; }
  int p() const noexcept { return p_; }
  std::size_t size() const noexcept { return masks_.size(); }
  std::span<const std::uint64_t> masks() const noexcept { return masks_; }
  std::span<const Incidence> incident(int site) const noexcept {
    return {incidence_.data() + offsets_[static_cast<std::size_t>(site)],
            offsets_[static_cast<std::size_t>(site) + 1] - offsets_[static_cast<std::size_t>(site)]};
  }

  static std::shared_ptr<const CouplingIndex> shared(int N, int p);

 private:
  int N_;
  int p_;
  std::vector<std::uint64_t> masks_;
  std::vector<Incidence> incidence_;
  std::vector<std::size_t> offsets_;
};

/// One realization of the Gaussian couplings, g_J stored at the colex rank of J.
class Disorder {
 public:
  Disorder(int N, int p, std::uint64_t seed, std::vector<double> couplings);

  int N() const noexcept { return N_; }
  int p() const noexcept { return p_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const double> couplings() const noexcept { return couplings_; }
  const CouplingIndex& index() const noexcept { return *index_; }

  /// Same shape and seed, every coupling multiplied by `factor`.
  Disorder scaled(double factor) const;

 private:
  int N_;
  int p_;
  std::uint64_t seed_;
  std::vector<double> couplings_;
  std::shared_ptr<const CouplingIndex> index_;
};

/// C(N, p) standard normals; entry r is counter_normal(seed, r).
Disorder sample_disorder(const ModelParams& params, std::uint64_t seed);

/// Text format: a header line "pspin-disorder 1 <N> <p> <seed>" followed by one value per line.
void write_disorder(std::ostream& out, const Disorder& disorder);
Disorder read_disorder(std::istream& in);

/// -H(sigma), full O(C(N, p)) evaluation.
double neg_hamiltonian(const SpinConfig& config, const Disorder& disorder, const ModelParams& params);

/// Per-site partial sums field[i] = sum_{J contains i} g_J prod_{j in J, j != i} sigma_j.
class LocalFieldCache {
 public:
  LocalFieldCache(const SpinConfig& config, const Disorder& disorder);

  double operator[](int site) const noexcept { return field_[static_cast<std::size_t>(site)]; }
  std::span<const double> fields() const noexcept { return field_; }

  /// Flips `site` in `config` and updates the cache in O(C(N-1, p-1) * (p-1)).
  void apply_flip(SpinConfig& config, int site, const Disorder& disorder) noexcept;

  /// True if the cache was built for, or updated along with, exactly this configuration.
  bool tracks(const SpinConfig& config) const noexcept { return bits_ == config.bits(); }

 private:
  std::vector<double> field_;
  std::uint64_t bits_ = 0;
};

/// beta * u_N for the given parameters.
double coupling_scale(const ModelParams& params);

/// Hot-loop form of the flip delta with beta * u_N precomputed.
inline double flip_delta(int spin, double field, double scale, double h) noexcept {
  return -2.0 * spin * (scale * field + h);
}

/// Change of -H when sigma_site is negated: -2 sigma_site (beta u_N field[site] + h). O(1).
/// A cache that does not track `config` is a contract violation (asserted in debug builds).
double delta_neg_h_flip(const SpinConfig& config, int site, const LocalFieldCache& cache, const ModelParams& params);

}  // namespace pspin
