#include <cmath>
#include <limits>

#include "pspin/combinatorics.hpp"
#include "pspin/errors.hpp"
#include "pspin/estimators.hpp"
#include "pspin/parallel.hpp"
#include "pspin/random.hpp"

namespace pspin {

namespace {

constexpr int kMaxCavityN = 21;

}  // namespace

CavitySystem::CavitySystem(const ModelParams& params, const Disorder& disorder, std::vector<double> z, double q)
    : params_(params), scale_(coupling_scale(params)), q_(q), z_(std::move(z)) {
  params.validate();
  if (params.N > kMaxCavityN) throw ResourceLimitError("cavity check enumerates 2^(N-1) states; N too large");
  if (disorder.N() != params.N || disorder.p() != params.p) throw UsageError("cavity: disorder shape mismatch");
  const int n = params.N - 1;
  const std::uint64_t last = std::uint64_t{1} << n;

  std::vector<std::uint64_t> inner_masks;
  std::vector<double> inner_g, outer_g;
  const auto masks = disorder.index().masks();
  const auto g = disorder.couplings();
  for (std::size_t r = 0; r < masks.size(); ++r) {
    if (masks[r] & last) {
      eta_masks_.push_back(masks[r] & ~last);
      outer_g.push_back(g[r]);
    } else {
      inner_masks.push_back(masks[r]);
      inner_g.push_back(g[r]);
    }
  }
  if (z_.size() != eta_masks_.size()) throw UsageError("cavity: need one z per coupling containing the last site");
  for (double v : z_) z_sum_ += v;

  const std::size_t states = std::size_t{1} << n;
  log_weight_.resize(states);
  cavity_field_.resize(states);
  for (std::size_t b = 0; b < states; ++b) {
    const SpinConfig rho(b, n);
    double inner = 0.0;
    for (std::size_t j = 0; j < inner_masks.size(); ++j) inner += inner_g[j] * rho.parity(inner_masks[j]);
    double outer = 0.0;
    for (std::size_t j = 0; j < eta_masks_.size(); ++j) outer += outer_g[j] * rho.parity(eta_masks_[j]);
    log_weight_[b] = scale_ * inner + params.h * rho.magnetization();
    cavity_field_[b] = scale_ * outer;
  }
}

double CavitySystem::magnetization(double t) const { return terms(t).m; }

CavitySystem::Terms CavitySystem::terms(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw UsageError("interpolation parameter must lie in [0, 1]");
  const int p = params_.p;
  const double st = std::sqrt(t);
  const double shift = scale_ * std::pow(q_, (p - 1) / 2.0) * std::sqrt(1.0 - t) * z_sum_ + params_.h;
  const std::size_t states = log_weight_.size();

  std::vector<double> a(states);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < states; ++b) {
    a[b] = st * cavity_field_[b] + shift;
    top = std::max(top, log_weight_[b] + std::fabs(a[b]));
  }
  const std::size_t nq = eta_masks_.size();
  std::vector<double> sum_a(nq, 0.0), sum_b(nq, 0.0);
  double z = 0.0, odd = 0.0;
  const int n = params_.N - 1;
  for (std::size_t b = 0; b < states; ++b) {
    const double up = std::exp(log_weight_[b] + a[b] - top);
    const double down = std::exp(log_weight_[b] - a[b] - top);
    z += up + down;
    odd += up - down;
    const SpinConfig rho(b, n);
    for (std::size_t j = 0; j < nq; ++j) {
      const int eta = rho.parity(eta_masks_[j]);
      sum_a[j] += eta * (up - down);
      sum_b[j] += eta * (up + down);
    }
  }
  Terms out;
  out.m = odd / z;
  const double m = out.m;
  const double c = std::pow(q_, p - 1);
  double rhs = 0.0;
  for (std::size_t j = 0; j < nq; ++j) {
    const double A = sum_a[j] / z;
    const double B = sum_b[j] / z;
    rhs += (B * B - c) - 4.0 * (m * A * B - c * m * m) + 3.0 * (m * m * A * A - c * m * m * m * m);
  }
  out.rhs = scale_ * scale_ * rhs;
  return out;
}

Disorder cavity_disorder(const ModelParams& params, std::uint64_t seed, int index) {
  return sample_disorder(params, derive_seed(seed, 0xCA, static_cast<std::uint64_t>(index)));
}

std::vector<double> cavity_z(const ModelParams& params, std::uint64_t seed, int index) {
  const std::uint64_t key = derive_seed(seed, 0xCB, static_cast<std::uint64_t>(index));
  const Count count = binom(params.N - 1, params.p - 1);
  std::vector<double> z(static_cast<std::size_t>(count));
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = counter_normal(key, j);
  return z;
}

CavityRow cavity_row(const ModelParams& params, double t, int n_disorder, std::uint64_t seed, double delta,
                     int quad_order) {
  if (!(delta > 0.0) || t - delta < 0.0 || t + delta > 1.0) {
    throw UsageError("cavity finite difference needs [t - delta, t + delta] inside [0, 1]");
  }
  if (n_disorder < 2) throw UsageError("cavity check needs at least two draws");
  const double q = theory_q(params, quad_order);
  const auto rows = parallel_map(static_cast<std::size_t>(n_disorder), [&](std::size_t i) {
    const int idx = static_cast<int>(i);
    const CavitySystem sys(params, cavity_disorder(params, seed, idx), cavity_z(params, seed, idx), q);
    const double mp = sys.magnetization(t + delta);
    const double mm = sys.magnetization(t - delta);
    const CavitySystem::Terms at = sys.terms(t);
    const double fd = (mp * mp - mm * mm) / (2.0 * delta);
    return std::vector<double>{at.m * at.m, fd, at.rhs, fd - at.rhs};
  });
  auto col = [&](std::size_t j, const char* src) {
    return jackknife(rows, [j](std::span<const double> x) { return x[j]; }, src);
  };
  CavityRow row;
  row.t = t;
  row.nu_t = col(0, "exact-cavity");
  row.finite_difference = col(1, "exact-cavity");
  row.formula_rhs = col(2, "exact-cavity");
  row.difference = col(3, "exact-cavity");
  return row;
}

std::vector<CavityRow> cavity_derivative_check(const ModelParams& params, std::span<const double> t_grid,
                                               int n_disorder, std::uint64_t seed, double delta, int quad_order) {
  std::vector<CavityRow> out;
  for (double t : t_grid) out.push_back(cavity_row(params, t, n_disorder, seed, delta, quad_order));
  return out;
}

}  // namespace pspin
