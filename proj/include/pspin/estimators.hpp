#pragma once

// Quenched averages nu(f) = E<f> over independent disorder draws, with
// delete-one jackknife errors, plus the scaling scans built on top of them.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pspin/exact.hpp"
#include "pspin/mcmc.hpp"
#include "pspin/model.hpp"
#include "pspin/theory.hpp"

namespace pspin {

struct NuEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  int n_disorder = 0;
  std::string source;  // "exact", "exact-sampled(S)", "mcmc(RxS)"
};

/// Delete-one jackknife of stat(column means) over rows (one row per disorder draw).
NuEstimate jackknife(const std::vector<std::vector<double>>& rows,
                     const std::function<double(std::span<const double>)>& stat, std::string source = {});

/// Jackknife of a plain mean (equals the classical standard error).
NuEstimate jackknife_mean(std::span<const double> values, std::string source = {});

enum class Engine { exact, mcmc };

std::string to_string(Engine engine);
Engine parse_engine(const std::string& text);

struct EstimatorConfig {
  Engine engine = Engine::exact;
  ExactGates gates;
  std::size_t exact_samples = 10000;  // replica pairs or quadruples per draw when sampling exactly
  int mcmc_replicas = 4;
  int mcmc_retained_sweeps = 10000;   // burn-in is 100 N sweeps
  DynamicsKind dynamics = DynamicsKind::glauber;
  double min_ess = 100.0;
  int quad_order = kDefaultQuadratureOrder;
  bool antithetic = false;            // pair each draw g with -g; n_disorder counts pairs
};

/// Principal fixed-point root for the same (beta, h, p).
double theory_q(const ModelParams& params, int quad_order = kDefaultQuadratureOrder);

/// nu((R_{1,2} - q)^k) for each requested k.
std::map<int, NuEstimate> nu_overlap_moments(const ModelParams& params, std::span<const int> ks, int n_disorder,
                                             const EstimatorConfig& cfg, std::uint64_t seed);

struct ScanRow {
  int N = 0;
  std::string stat;
  NuEstimate estimate;
  double prediction = 0.0;
  double scaled = 0.0;
};

struct SelfAveragingScan {
  std::vector<ScanRow> rows;  // per N: "mean_dev" (scaled N |nu(R-q)|) and "second" (scaled N nu((R-q)^2))
  double slope = 0.0;         // OLS slope of log nu((R-q)^2) against log N
  double slope_se = 0.0;
  double bounded_ratio = 0.0; // max over N of N |nu(R-q)| divided by its min
};

SelfAveragingScan self_averaging_scan(const ModelParams& base, std::span<const int> N_list, int n_disorder,
                                      const EstimatorConfig& cfg, std::uint64_t seed);

/// Delta_{p-1} = R13^(p-1) - R14^(p-1) - R23^(p-1) + R24^(p-1) for one replica quadruple.
double delta_statistic(const SpinConfig& s1, const SpinConfig& s2, const SpinConfig& s3, const SpinConfig& s4, int p);

struct DeltaSqResult {
  NuEstimate estimate;
  double prediction = 0.0;
};

DeltaSqResult delta_sq_estimate(const ModelParams& params, int n_disorder, const EstimatorConfig& cfg,
                                std::uint64_t seed);

struct CltRow {
  int k = 0;
  NuEstimate estimate;
  double prediction = 0.0;
};

struct CltCheck {
  std::vector<CltRow> rows;
  NuEstimate kurtosis;  // nu((R-q)^4) / nu((R-q)^2)^2
  double clt_variance = 0.0;
};

CltCheck clt_moment_check(const ModelParams& params, int k_max, int n_disorder, const EstimatorConfig& cfg,
                          std::uint64_t seed);

struct PnScan {
  std::vector<ScanRow> rows;  // stat "p_N", prediction Phi, scaled N (p_N - Phi)
  double phi = 0.0;
  double phi_hat = 0.0;       // weighted least-squares intercept of p_N = a + c / N
  double phi_hat_se = 0.0;
  double slope_c = 0.0;
  int runs = 0;               // sign runs of the fit residuals
  double runs_z = 0.0;        // Wald-Wolfowitz statistic (0 when undefined)
  bool runs_pass = true;
};

PnScan pn_vs_phi_scan(const ModelParams& base, std::span<const int> N_list, int n_disorder, const EstimatorConfig& cfg,
                      std::uint64_t seed);

/// Paired mcmc-minus-exact difference of nu((R-q)^k) on shared disorder draws.
struct EngineComparison {
  int k = 0;
  NuEstimate exact;
  NuEstimate mcmc;
  NuEstimate difference;
};

std::vector<EngineComparison> compare_engines(const ModelParams& params, std::span<const int> ks, int n_disorder,
                                              const EstimatorConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// One-site cavity interpolation (last site decoupled) with f = eps^1 eps^2.

class CavitySystem {
 public:
  /// `disorder` covers all N sites; `z` has one entry per coupling that contains site N.
  CavitySystem(const ModelParams& params, const Disorder& disorder, std::vector<double> z, double q);

  int N() const noexcept { return params_.N; }

  struct Terms {
    double m = 0.0;    // <eps>_t
    double rhs = 0.0;  // derivative formula for the draw
  };

  /// <eps>_t, the single-replica cavity magnetization.
  double magnetization(double t) const;

  /// <eps>_t together with the derivative formula evaluated on this draw.
  Terms terms(double t) const;

 private:
  ModelParams params_;
  double scale_;
  double q_;
  std::vector<double> log_weight_;   // -H_{N-1}(rho), length 2^(N-1)
  std::vector<double> cavity_field_; // G(rho) = beta u_N sum_{J in Q} g_J eta_J(rho)
  std::vector<std::uint64_t> eta_masks_;
  std::vector<double> z_;
  double z_sum_ = 0.0;
};

struct CavityRow {
  double t = 0.0;
  NuEstimate nu_t;              // nu_{1,t}(eps^1 eps^2)
  NuEstimate finite_difference;
  NuEstimate formula_rhs;
  NuEstimate difference;        // finite difference minus formula, jackknifed jointly
};

CavityRow cavity_row(const ModelParams& params, double t, int n_disorder, std::uint64_t seed, double delta = 0.02,
                     int quad_order = kDefaultQuadratureOrder);

std::vector<CavityRow> cavity_derivative_check(const ModelParams& params, std::span<const double> t_grid,
                                               int n_disorder, std::uint64_t seed, double delta = 0.02,
                                               int quad_order = kDefaultQuadratureOrder);

/// Disorder and cavity Gaussians for cavity draw `index`.
Disorder cavity_disorder(const ModelParams& params, std::uint64_t seed, int index);
std::vector<double> cavity_z(const ModelParams& params, std::uint64_t seed, int index);

/// CSV with header N,stat,estimate,std_err,prediction,scaled.
void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows);

}  // namespace pspin
