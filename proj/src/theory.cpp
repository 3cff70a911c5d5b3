#include "pspin/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

namespace pspin {

namespace {

constexpr int kScanIntervals = 1024;

double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

double sech4(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c * c * c);
}

double q_pow(double q, double e) { return e == 0.0 ? 1.0 : std::pow(q, e); }

void check_q(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw UsageError("overlap value must lie in [0, 1]");
}

}  // namespace

QuadratureRule gauss_hermite_rule(int order) {
  if (order < 2 || order > 512) throw UsageError("quadrature order must be in [2, 512]");
  const int n = order;
  const double pim4 = 1.0 / std::pow(M_PI, 0.25);
  std::vector<double> x(n), w(n);
  double z = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= 1e-15 * std::max(1.0, std::fabs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericalError("gauss_hermite_rule: Newton iteration did not converge");
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  QuadratureRule rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += w[i];
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = std::sqrt(2.0) * x[n - 1 - i];
    rule.weights[i] = w[n - 1 - i] / total;
  }
  return rule;
}

const QuadratureRule& cached_rule(int order) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<QuadratureRule>(gauss_hermite_rule(order));
  return *slot;
}

void ThermoParams::validate() const {
  if (p < 2) throw UsageError("p must be at least 2");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw UsageError("beta must be finite and non-negative");
  if (!(h > 0.0) || !std::isfinite(h)) throw UsageError("h must be finite and positive");
}

std::string to_string(A2Variant variant) { return variant == A2Variant::proof ? "proof" : "printed"; }

A2Variant parse_a2_variant(const std::string& text) {
  if (text == "proof") return A2Variant::proof;
  if (text == "printed") return A2Variant::printed;
  throw UsageError("unknown A2 variant '" + text + "' (expected proof or printed)");
}

double cavity_field_scale(const ThermoParams& params, double x) {
  return params.beta * std::sqrt(params.p / 2.0) * q_pow(x, (params.p - 1) / 2.0);
}

double overlap_map(const ThermoParams& params, double x, const QuadratureRule& rule) {
  return q_hat(2, x, params, rule);
}

double q_hat(int n, double q, const ThermoParams& params, const QuadratureRule& rule) {
  if (n < 0) throw UsageError("q_hat order must be non-negative");
  check_q(q);
  return gauss_expectation(
      [n](double x) {
        const double t = std::tanh(x);
        double v = 1.0;
        for (int i = 0; i < n; ++i) v *= t;
        return v;
      },
      cavity_field_scale(params, q), params.h, rule);
}

double sech4_expectation(double q, const ThermoParams& params, const QuadratureRule& rule) {
  check_q(q);
  return gauss_expectation(sech4, cavity_field_scale(params, q), params.h, rule);
}

double beta_H(int p) {
  if (p < 2) throw UsageError("p must be at least 2");
  auto g = [p](double b) { return 8.0 * p * p * b * b * std::exp(16.0 * b * b * p) - 0.5; };
  double lo = 0.0, hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::fabs(g(lo)) <= std::fabs(g(hi)) ? lo : hi;
}

RootReport solve_q(const ThermoParams& params, const QuadratureRule& rule) {
  params.validate();
  auto f = [&](double x) { return x - overlap_map(params, x, rule); };

  RootReport report;
  std::array<double, kScanIntervals + 1> values{};
  for (int k = 0; k <= kScanIntervals; ++k) values[k] = f(static_cast<double>(k) / kScanIntervals);
  if (!(values[0] < 0.0) || !(values[kScanIntervals] > 0.0)) {
    throw NumericalError("solve_q: fixed-point map has unexpected boundary values");
  }

  for (int k = 0; k < kScanIntervals; ++k) {
    const double fa = values[k], fb = values[k + 1];
    double lo = static_cast<double>(k) / kScanIntervals;
    double hi = static_cast<double>(k + 1) / kScanIntervals;
    if (fb == 0.0) {
      if (k + 1 < kScanIntervals) report.roots.push_back(hi);
      continue;
    }
    if (!((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))) continue;
    const bool rising = fa < 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = f(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      ((fm < 0.0) == rising ? lo : hi) = mid;
    }
    report.roots.push_back(std::fabs(f(lo)) <= std::fabs(f(hi)) ? lo : hi);
  }
  if (report.roots.empty()) throw NumericalError("solve_q: no root found");
  for (double r : report.roots) {
    const double res = std::fabs(f(r));
    if (!(res < 1e-12)) throw NumericalError("solve_q: root residual above tolerance");
    report.residuals.push_back(res);
  }
  report.inside_H = params.beta <= beta_H(params.p);
  report.principal = report.roots.front();
  return report;
}

double rs_free_energy(const ThermoParams& params, double q, const QuadratureRule& rule) {
  check_q(q);
  const int p = params.p;
  const double b = params.beta;
  const double energy = b * b / 4.0 * (1.0 - p * q_pow(q, p - 1) + (p - 1) * q_pow(q, p));
  const double entropy = gauss_expectation(log_cosh, cavity_field_scale(params, q), params.h, rule);
  return energy + std::log(2.0) + entropy;
}

double at_margin(const ThermoParams& params, double q, const QuadratureRule& rule) {
  const int p = params.p;
  const double qh4 = q_hat(4, q, params, rule);
  return 1.0 - params.beta * params.beta * (p * (p - 1) / 2.0) * q_pow(q, p - 2) * (1.0 - 2.0 * q + qh4);
}

std::optional<double> beta_at(int p, double h, const QuadratureRule& rule, double beta_max) {
  auto margin = [&](double beta) {
    const ThermoParams tp{p, beta, h};
    return at_margin(tp, solve_q(tp, rule).principal, rule);
  };
  constexpr int kSteps = 200;
  double prev_beta = 0.0;
  for (int k = 1; k <= kSteps; ++k) {
    const double beta = beta_max * k / kSteps;
    if (margin(beta) <= 0.0) {
      double lo = prev_beta, hi = beta;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev_beta = beta;
  }
  return std::nullopt;
}

namespace {

struct Pieces {
  int p;
  double b2;      // beta^2
  double q;
  double qh4;
  double qp2;     // q^(p-2)
  double d_at;    // 1 - b2 p(p-1)/2 q^(p-2) (1 - 2q + qh4)
  double d_four;  // 1 - b2 p(p-1)/2 q^(p-2) (1 - 4q + 3 qh4)
};

Pieces pieces(const ThermoParams& params, double q, const QuadratureRule& rule) {
  params.validate();
  Pieces s{};
  s.p = params.p;
  s.b2 = params.beta * params.beta;
  s.q = q;
  s.qh4 = q_hat(4, q, params, rule);
  s.qp2 = q_pow(q, s.p - 2);
  const double c = s.b2 * (s.p * (s.p - 1) / 2.0) * s.qp2;
  s.d_at = 1.0 - c * (1.0 - 2.0 * q + s.qh4);
  s.d_four = 1.0 - c * (1.0 - 4.0 * q + 3.0 * s.qh4);
  return s;
}

double a2_from(const Pieces& s, A2Variant variant) {
  if (!(s.d_at > 0.0)) throw RegimeError("A^2 denominator is not positive (outside the AT region)");
  const double e = variant == A2Variant::proof ? 2.0 * (s.p - 2) : 2.0 * (s.p - 1);
  return (s.p - 1.0) * (s.p - 1.0) * q_pow(s.q, e) * (1.0 - 2.0 * s.q + s.qh4) / s.d_at;
}

double b2_from(const Pieces& s, double a2) {
  if (!(s.d_four > 0.0)) throw RegimeError("B^2 denominator is not positive");
  const double lead = (s.p - 1.0) * s.qp2;
  return lead * (s.q - s.qh4) * (lead + s.b2 * (s.p / 2.0) * a2) / s.d_four;
}

double c2_from(const Pieces& s, double a2, double b2) {
  if (!(s.d_four > 0.0)) throw RegimeError("C^2 denominator is not positive");
  const double lead = (s.p - 1.0) * s.qp2;
  const double first = (s.qh4 - s.q * s.q) * (lead + s.b2 * (s.p / 2.0) * a2);
  const double second = s.b2 * s.p * (2.0 * s.q + s.q * s.q - 3.0 * s.qh4) * b2;
  return lead * (first + second) / s.d_four;
}

}  // namespace

double variance_A2(const ThermoParams& params, double q, const QuadratureRule& rule, A2Variant variant) {
  return a2_from(pieces(params, q, rule), variant);
}

double variance_B2(const ThermoParams& params, double q, const QuadratureRule& rule, A2Variant variant) {
  const Pieces s = pieces(params, q, rule);
  return b2_from(s, a2_from(s, variant));
}

double variance_C2(const ThermoParams& params, double q, const QuadratureRule& rule, A2Variant variant) {
  const Pieces s = pieces(params, q, rule);
  const double a2 = a2_from(s, variant);
  return c2_from(s, a2, b2_from(s, a2));
}

double gaussian_moment(int k) {
  if (k < 0) throw UsageError("moment order must be non-negative");
  if (k % 2 == 1) return 0.0;
  double v = 1.0;
  for (int j = k - 1; j > 1; j -= 2) v *= j;
  return v;
}

TheorySolution solve_theory(const ThermoParams& params, int quadrature_order, A2Variant variant) {
  params.validate();
  const QuadratureRule& rule = cached_rule(quadrature_order);
  const RootReport roots = solve_q(params, rule);

  TheorySolution s;
  s.params = params;
  s.quadrature_order = quadrature_order;
  s.a2_variant = variant;
  s.q = roots.principal;
  s.all_roots = roots.roots;
  s.q_hat[0] = 1.0;
  for (int n = 1; n <= 4; ++n) s.q_hat[n] = q_hat(n, s.q, params, rule);
  s.phi = rs_free_energy(params, s.q, rule);
  s.at_margin = at_margin(params, s.q, rule);
  s.beta_H = beta_H(params.p);
  s.inside_H = roots.inside_H;

  const Pieces pc = pieces(params, s.q, rule);
  s.a2 = a2_from(pc, variant);
  s.b2 = b2_from(pc, s.a2);
  s.c2 = c2_from(pc, s.a2, s.b2);
  s.clt_var = clt_variance(s);
  return s;
}

double clt_variance(const TheorySolution& s) {
  const double d = (s.params.p - 1.0) * q_pow(s.q, s.params.p - 2);
  if (!(d > 0.0)) throw NumericalError("clt_variance: degenerate normalization");
  return (s.a2 + 2.0 * s.b2 + s.c2) / (d * d);
}

double clt_moment_prediction(int k, int N, const TheorySolution& s) {
  if (N < 1) throw UsageError("N must be positive");
  return std::pow(static_cast<double>(N), -k / 2.0) * gaussian_moment(k) * std::pow(clt_variance(s), k / 2.0);
}

double delta_sq_prediction(int N, const TheorySolution& s) {
  if (N < 1) throw UsageError("N must be positive");
  const int p = s.params.p;
  if (!(s.at_margin > 0.0)) throw RegimeError("delta_sq_prediction: outside the AT region");
  return 4.0 * (p - 1.0) * (p - 1.0) * q_pow(s.q, 2.0 * (p - 2)) * (1.0 - 2.0 * s.q + s.q_hat[4]) /
         (static_cast<double>(N) * s.at_margin);
}

}  // namespace pspin
