#pragma once

// Replica-symmetric predictions for the p-spin model with external field.
//
// Every Gaussian expectation has the form E[f(a Y + h)] with Y standard
// normal and a = beta * sqrt(p/2) * q^((p-1)/2), evaluated with a
// Gauss-Hermite rule normalized to the standard normal measure.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pspin/errors.hpp"

namespace pspin {

struct QuadratureRule {
  std::vector<double> nodes;    // standard-normal abscissae
  std::vector<double> weights;  // sum to 1
  int order = 0;
};

/// Gauss-Hermite rule of the given order, rescaled to the standard normal law.
QuadratureRule gauss_hermite_rule(int order);

/// Process-wide cached rule (orders are immutable once built).
const QuadratureRule& cached_rule(int order);

inline constexpr int kDefaultQuadratureOrder = 64;

/// E[fn(scale * Y + shift)] = sum_i w_i fn(scale * y_i + shift). Throws NumericalError on a non-finite term.
template <class Fn>
double gauss_expectation(Fn&& fn, double scale, double shift, const QuadratureRule& rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = fn(scale * rule.nodes[i] + shift);
    if (!std::isfinite(v)) throw NumericalError("gauss_expectation: integrand is not finite");
    sum += rule.weights[i] * v;
  }
  return sum;
}

/// The (p, beta, h) triple that fixes every closed-form prediction.
struct ThermoParams {
  int p = 2;
  double beta = 0.0;
  double h = 0.5;

  void validate() const;
};

/// How the A^2 numerator power of q is written: q^(2(p-2)) (proof, default) or q^(2(p-1)) (printed display).
enum class A2Variant { proof, printed };

std::string to_string(A2Variant variant);
A2Variant parse_a2_variant(const std::string& text);

/// Cavity-field standard deviation beta * sqrt(p/2) * x^((p-1)/2).
double cavity_field_scale(const ThermoParams& params, double x);

/// Right-hand side of the fixed-point equation: E[tanh^2(beta sqrt(p/2) x^((p-1)/2) Y + h)].
double overlap_map(const ThermoParams& params, double x, const QuadratureRule& rule);

struct RootReport {
  std::vector<double> roots;      // ascending
  std::vector<double> residuals;  // |q - overlap_map(q)| per root
  double principal = 0.0;
  bool inside_H = false;
};

/// All roots of q = overlap_map(q) in [0, 1] by a 1024-interval sign-change scan plus bisection.
/// The principal root is the unique root inside condition (H), otherwise the smallest one.
RootReport solve_q(const ThermoParams& params, const QuadratureRule& rule);

/// E[tanh^n(beta sqrt(p/2) q^((p-1)/2) Y + h)].
double q_hat(int n, double q, const ThermoParams& params, const QuadratureRule& rule);

/// E[cosh^-4(beta sqrt(p/2) q^((p-1)/2) Y + h)].
double sech4_expectation(double q, const ThermoParams& params, const QuadratureRule& rule);

/// The positive root of 8 p^2 b^2 exp(16 b^2 p) = 1/2.
double beta_H(int p);

/// Replica-symmetric functional F(beta, h, q, p). At the principal root this is Phi(beta, h, p).
double rs_free_energy(const ThermoParams& params, double q, const QuadratureRule& rule);

/// 1 - beta^2 (p(p-1)/2) q^(p-2) (1 - 2q + q_hat_4).
double at_margin(const ThermoParams& params, double q, const QuadratureRule& rule);

/// First beta in (0, beta_max] where at_margin (with q re-solved at each beta) crosses zero;
/// nullopt when the margin stays positive on the whole range.
std::optional<double> beta_at(int p, double h, const QuadratureRule& rule, double beta_max = 20.0);

/// Closed-form fluctuation variances. Throw RegimeError when a denominator is not positive.
double variance_A2(const ThermoParams& params, double q, const QuadratureRule& rule, A2Variant variant = A2Variant::proof);
double variance_B2(const ThermoParams& params, double q, const QuadratureRule& rule, A2Variant variant = A2Variant::proof);
double variance_C2(const ThermoParams& params, double q, const QuadratureRule& rule, A2Variant variant = A2Variant::proof);

/// E[g^k] for standard normal g: (k-1)!! for even k, 0 for odd k.
double gaussian_moment(int k);

struct TheorySolution {
  ThermoParams params;
  int quadrature_order = 0;
  A2Variant a2_variant = A2Variant::proof;
  double q = 0.0;
  std::vector<double> all_roots;
  double q_hat[5] = {};  // q_hat[n] for n = 1..4; q_hat[0] = 1
  double phi = 0.0;
  double at_margin = 0.0;
  double beta_H = 0.0;
  bool inside_H = false;
  double a2 = 0.0;
  double b2 = 0.0;
  double c2 = 0.0;
  double clt_var = 0.0;
};

/// Everything at once. Throws RegimeError when a variance denominator is not positive.
TheorySolution solve_theory(const ThermoParams& params, int quadrature_order = kDefaultQuadratureOrder,
                            A2Variant variant = A2Variant::proof);

/// (A^2 + 2B^2 + C^2) / ((p-1) q^(p-2))^2: limiting variance of sqrt(N) (R_{1,2} - q).
double clt_variance(const TheorySolution& solution);

/// N^(-k/2) a(k) clt_variance^(k/2): predicted nu((R_{1,2} - q)^k).
double clt_moment_prediction(int k, int N, const TheorySolution& solution);

/// 4 (p-1)^2 q^(2(p-2)) (1 - 2q + q_hat_4) / (N * at_margin): predicted nu(Delta_{p-1}^2).
double delta_sq_prediction(int N, const TheorySolution& solution);

}  // namespace pspin
