#pragma once

// Command-line front end: configuration parsing, dispatch and result records.
//
// Exit codes: 0 success, 1 usage or validation error, 2 numerical or regime
// error (including failed acceptance criteria), 3 resource gate.

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "pspin/estimators.hpp"
#include "pspin/model.hpp"
#include "pspin/theory.hpp"

namespace pspin {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitResource = 3 };

struct RunConfig {
  std::string operation = "theory";
  ModelParams model;
  std::optional<std::uint64_t> seed;
  EstimatorConfig estimator;
  A2Variant a2_variant = A2Variant::proof;
  std::vector<int> k_list{1, 2};
  std::vector<int> N_list;
  int n_disorder = 100;
  int k_max = 4;
  std::vector<double> t_grid{0.25, 0.5, 0.75};
  double delta = 0.02;
  // exact and mcmc operations
  bool two_point = true;
  int replicas = 2;
  int sweeps = 0;     // 0: burn-in 100 N plus 10000 retained sweeps
  int burn_in = -1;   // -1: 100 N
  int thin = 1;
  std::string out_path;  // empty: stdout
  std::string format = "json";

  /// Throws UsageError on inconsistent settings (unknown operation, missing seed, bad lists).
  void validate() const;
};

/// Names accepted by RunConfig::operation.
const std::vector<std::string>& operation_names();

/// Parses the JSON configuration (schema_version 1). Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

nlohmann::json to_json(const TheorySolution& s);
nlohmann::json to_json(const NuEstimate& e);

/// Runs one configured operation and returns its ResultRecord. CSV output (when requested)
/// is written to `csv`; the record is always returned.
nlohmann::json execute(const RunConfig& cfg, std::ostream* csv);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pspin
