#include "pspin/model.hpp"

#include <cassert>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "pspin/combinatorics.hpp"
#include "pspin/errors.hpp"
#include "pspin/random.hpp"

namespace pspin {

void ModelParams::validate() const {
  if (p < 2) throw UsageError("p must be at least 2");
  if (p > kMaxOrder) throw UsageError("p must be at most " + std::to_string(kMaxOrder));
  if (N < p) throw UsageError("N must be at least p");
  if (N > kMaxSpins) throw UsageError("N must be at most " + std::to_string(kMaxSpins));
  if (!std::isfinite(beta) || beta < 0.0) throw UsageError("beta must be finite and nonnegative");
  if (!std::isfinite(h) || h <= 0.0) throw UsageError("h must be finite and strictly positive");
}

SpinConfig::SpinConfig(std::uint64_t bits, int n) : bits_(bits), n_(n) {
  if (n < 1 || n > kMaxSpins) throw UsageError("spin count out of range");
  if (n < 64 && (bits >> n) != 0) throw UsageError("spin bits set beyond N");
}

SpinConfig SpinConfig::all_up(int n) {
  return SpinConfig(n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1, n);
}

double overlap(const SpinConfig& a, const SpinConfig& b) {
  assert(a.size() == b.size());
  const int n = a.size();
  return static_cast<double>(n - 2 * std::popcount(a.bits() ^ b.bits())) / n;
}

CouplingIndex::CouplingIndex(int N, int p) : N_(N), p_(p) {
  if (p < 1 || p > N || p > kMaxOrder || N > kMaxSpins) throw UsageError("CouplingIndex: bad (N, p)");
  const Count count = binom(N, p);
  if (count > std::numeric_limits<std::uint32_t>::max()) throw ResourceLimitError("too many couplings");
  masks_.reserve(static_cast<std::size_t>(count));
  std::vector<int> first(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) first[static_cast<std::size_t>(j)] = j + 1;
  IndexTuple t{std::span<const int>(first)};
  do {
    masks_.push_back(t.mask());
  } while (t.next_colex(N));

  std::vector<std::size_t> counts(static_cast<std::size_t>(N), 0);
  for (auto m : masks_) {
    for (auto rest = m; rest; rest &= rest - 1) ++counts[static_cast<std::size_t>(std::countr_zero(rest))];
  }
  offsets_.assign(static_cast<std::size_t>(N) + 1, 0);
  for (int i = 0; i < N; ++i) offsets_[static_cast<std::size_t>(i) + 1] = offsets_[static_cast<std::size_t>(i)] + counts[static_cast<std::size_t>(i)];
  incidence_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t r = 0; r < masks_.size(); ++r) {
    const auto m = masks_[r];
    for (auto rest = m; rest; rest &= rest - 1) {
      const int site = std::countr_zero(rest);
      incidence_[fill[static_cast<std::size_t>(site)]++] =
          Incidence{static_cast<std::uint32_t>(r), m & ~(std::uint64_t{1} << site)};
    }
  }
}

std::shared_ptr<const CouplingIndex> CouplingIndex::shared(int N, int p) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::weak_ptr<const CouplingIndex>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{N, p}];
  if (auto existing = slot.lock()) return existing;
  auto created = std::make_shared<const CouplingIndex>(N, p);
  slot = created;
  return created;
}

Disorder::Disorder(int N, int p, std::uint64_t seed, std::vector<double> couplings)
    : N_(N), p_(p), seed_(seed), couplings_(std::move(couplings)), index_(CouplingIndex::shared(N, p)) {
  if (couplings_.size() != index_->size()) throw UsageError("disorder length must equal C(N, p)");
  for (double g : couplings_) {
    if (!std::isfinite(g)) throw UsageError("disorder values must be finite");
  }
}

Disorder Disorder::scaled(double factor) const {
  std::vector<double> values(couplings_.begin(), couplings_.end());
  for (auto& v : values) v *= factor;
  return Disorder(N_, p_, seed_, std::move(values));
}

Disorder sample_disorder(const ModelParams& params, std::uint64_t seed) {
  params.validate();
  const auto count = static_cast<std::size_t>(binom(params.N, params.p));
  std::vector<double> values(count);
  for (std::size_t r = 0; r < count; ++r) values[r] = counter_normal(seed, r);
  return Disorder(params.N, params.p, seed, std::move(values));
}

void write_disorder(std::ostream& out, const Disorder& disorder) {
  out << "pspin-disorder 1 " << disorder.N() << ' ' << disorder.p() << ' ' << disorder.seed() << '\n';
  out.precision(17);
  for (double g : disorder.couplings()) out << g << '\n';
}

Disorder read_disorder(std::istream& in) {
  std::string magic;
  int version = 0;
  int N = 0;
  int p = 0;
  std::uint64_t seed = 0;
  if (!(in >> magic >> version >> N >> p >> seed) || magic != "pspin-disorder" || version != 1) {
    throw UsageError("not a pspin-disorder v1 stream");
  }
  if (p < 1 || N < p || N > kMaxSpins || p > kMaxOrder) throw UsageError("disorder header has invalid (N, p)");
  const auto count = static_cast<std::size_t>(binom(N, p));
  std::vector<double> values(count);
  for (auto& v : values) {
    if (!(in >> v)) throw UsageError("disorder stream truncated");
  }
  return Disorder(N, p, seed, std::move(values));
}

double coupling_scale(const ModelParams& params) { return params.beta * u_N(params.N, params.p); }

double neg_hamiltonian(const SpinConfig& config, const Disorder& disorder, const ModelParams& params) {
  const auto masks = disorder.index().masks();
  const auto g = disorder.couplings();
  double sum = 0.0;
  for (std::size_t r = 0; r < masks.size(); ++r) sum += g[r] * config.parity(masks[r]);
  return coupling_scale(params) * sum + params.h * config.magnetization();
}

LocalFieldCache::LocalFieldCache(const SpinConfig& config, const Disorder& disorder)
    : field_(static_cast<std::size_t>(disorder.N()), 0.0), bits_(config.bits()) {
  const auto g = disorder.couplings();
  for (int i = 0; i < disorder.N(); ++i) {
    double f = 0.0;
    for (const auto& inc : disorder.index().incident(i)) f += g[inc.rank] * config.parity(inc.others);
    field_[static_cast<std::size_t>(i)] = f;
  }
}

void LocalFieldCache::apply_flip(SpinConfig& config, int site, const Disorder& disorder) noexcept {
  const auto g = disorder.couplings();
  for (const auto& inc : disorder.index().incident(site)) {
    // Old value of g_J * prod_{J \ {site}} sigma; each other member j loses twice
    // its share g_J * prod_{J \ {j}} sigma = term * sigma_site * sigma_j.
    const double term = g[inc.rank] * config.parity(inc.others) * config.spin(site);
    for (auto rest = inc.others; rest; rest &= rest - 1) {
      const int j = std::countr_zero(rest);
      field_[static_cast<std::size_t>(j)] -= 2.0 * term * config.spin(j);
    }
  }
  config.flip(site);
  bits_ = config.bits();
}

double delta_neg_h_flip(const SpinConfig& config, int site, const LocalFieldCache& cache, const ModelParams& params) {
  assert(cache.tracks(config) && "stale LocalFieldCache");
  return flip_delta(config.spin(site), cache[site], coupling_scale(params), params.h);
}

}  // namespace pspin
