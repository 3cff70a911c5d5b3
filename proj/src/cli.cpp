#include "pspin/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "pspin/acceptance.hpp"
#include "pspin/errors.hpp"
#include "pspin/exact.hpp"
#include "pspin/mcmc.hpp"

namespace pspin {

using nlohmann::json;

const std::vector<std::string>& operation_names() {
  static const std::vector<std::string> names = {
      "theory",         "exact",           "mcmc",     "nu_overlap_moments", "self_averaging_scan",
      "pn_vs_phi_scan", "delta_sq",        "clt_moment_check", "cavity_derivative_check"};
  return names;
}

namespace {

bool is_scan(const std::string& op) { return op == "self_averaging_scan" || op == "pn_vs_phi_scan"; }

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw UsageError(std::string(where) + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw UsageError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid value for '") + key + "': " + e.what());
  }
}

ThermoParams thermo(const ModelParams& m) { return {m.p, m.beta, m.h}; }

json nan_or(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void RunConfig::validate() const {
  const auto& ops = operation_names();
  if (std::find(ops.begin(), ops.end(), operation) == ops.end()) throw UsageError("unknown operation '" + operation + "'");
  if (format != "json" && format != "csv") throw UsageError("format must be json or csv");
  thermo(model).validate();
  if (operation == "theory") return;
  if (!seed) throw UsageError("a seed is required for operation '" + operation + "'");
  if (is_scan(operation)) {
    if (N_list.size() < 2) throw UsageError("scans need an N_list with at least two sizes");
    for (std::size_t i = 0; i < N_list.size(); ++i) {
      if (i > 0 && N_list[i] <= N_list[i - 1]) throw UsageError("N_list must be strictly increasing");
      ModelParams m = model;
      m.N = N_list[i];
      m.validate();
    }
  } else {
    model.validate();
  }
  if (n_disorder < 1) throw UsageError("n_disorder must be positive");
  if (operation == "exact" || operation == "mcmc") {
    if (format == "csv" && operation == "exact") throw UsageError("operation 'exact' only writes JSON");
  }
  if (operation == "mcmc") {
    if (replicas < 2) throw UsageError("mcmc needs at least two replicas");
    if (thin < 1) throw UsageError("thin must be at least 1");
  }
  if (operation == "nu_overlap_moments" && k_list.empty()) throw UsageError("k_list must not be empty");
  if (operation == "cavity_derivative_check" && t_grid.empty()) throw UsageError("t_grid must not be empty");
  if (estimator.exact_samples < 1) throw UsageError("exact_samples must be positive");
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, "config", {"schema_version", "operation", "seed", "model", "engine", "theory", "estimator", "sampler", "output"});
  if (!j.contains("schema_version")) throw UsageError("config is missing schema_version");
  if (j.at("schema_version") != kConfigSchemaVersion) {
    throw UsageError("unsupported schema_version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  RunConfig c;
  read(j, "operation", c.operation);
  if (j.contains("seed")) {
    const json& sj = j.at("seed");
    if (!sj.is_number_integer() || (!sj.is_number_unsigned() && sj.get<std::int64_t>() < 0)) {
      throw UsageError("seed must be a non-negative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, "model", {"N", "p", "beta", "h"});
    read(m, "N", c.model.N);
    read(m, "p", c.model.p);
    read(m, "beta", c.model.beta);
    read(m, "h", c.model.h);
  }
  if (j.contains("engine")) {
    const json& e = j.at("engine");
    check_keys(e, "engine", {"kind", "exact_samples", "mcmc_replicas", "mcmc_retained_sweeps", "dynamics", "min_ess",
                             "antithetic", "gates"});
    std::string kind = to_string(c.estimator.engine), dyn = to_string(c.estimator.dynamics);
    read(e, "kind", kind);
    read(e, "dynamics", dyn);
    c.estimator.engine = parse_engine(kind);
    c.estimator.dynamics = parse_dynamics(dyn);
    read(e, "exact_samples", c.estimator.exact_samples);
    read(e, "mcmc_replicas", c.estimator.mcmc_replicas);
    read(e, "mcmc_retained_sweeps", c.estimator.mcmc_retained_sweeps);
    read(e, "min_ess", c.estimator.min_ess);
    read(e, "antithetic", c.estimator.antithetic);
    if (e.contains("gates")) {
      const json& g = e.at("gates");
      check_keys(g, "gates", {"max_N", "max_N_two_point", "max_N_table", "t_budget"});
      read(g, "max_N", c.estimator.gates.max_N);
      read(g, "max_N_two_point", c.estimator.gates.max_N_two_point);
      read(g, "max_N_table", c.estimator.gates.max_N_table);
      read(g, "t_budget", c.estimator.gates.t_budget);
    }
  }
  if (j.contains("theory")) {
    const json& t = j.at("theory");
    check_keys(t, "theory", {"quad_order", "a2_variant"});
    read(t, "quad_order", c.estimator.quad_order);
    std::string v = to_string(c.a2_variant);
    read(t, "a2_variant", v);
    c.a2_variant = parse_a2_variant(v);
  }
  if (j.contains("estimator")) {
    const json& s = j.at("estimator");
    check_keys(s, "estimator", {"k_list", "N_list", "n_disorder", "k_max", "t_grid", "delta"});
    read(s, "k_list", c.k_list);
    read(s, "N_list", c.N_list);
    read(s, "n_disorder", c.n_disorder);
    read(s, "k_max", c.k_max);
    read(s, "t_grid", c.t_grid);
    read(s, "delta", c.delta);
  }
  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    check_keys(s, "sampler", {"two_point", "replicas", "sweeps", "burn_in", "thin"});
    read(s, "two_point", c.two_point);
    read(s, "replicas", c.replicas);
    read(s, "sweeps", c.sweeps);
    read(s, "burn_in", c.burn_in);
    read(s, "thin", c.thin);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"path", "format"});
    read(o, "path", c.out_path);
    read(o, "format", c.format);
  }
  if (is_scan(c.operation) && !c.N_list.empty()) c.model.N = c.N_list.front();
  c.validate();
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["operation"] = c.operation;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["model"] = {{"N", c.model.N}, {"p", c.model.p}, {"beta", c.model.beta}, {"h", c.model.h}};
  const EstimatorConfig& e = c.estimator;
  j["engine"] = {{"kind", to_string(e.engine)},
                 {"exact_samples", e.exact_samples},
                 {"mcmc_replicas", e.mcmc_replicas},
                 {"mcmc_retained_sweeps", e.mcmc_retained_sweeps},
                 {"dynamics", to_string(e.dynamics)},
                 {"min_ess", e.min_ess},
                 {"antithetic", e.antithetic},
                 {"gates",
                  {{"max_N", e.gates.max_N},
                   {"max_N_two_point", e.gates.max_N_two_point},
                   {"max_N_table", e.gates.max_N_table},
                   {"t_budget", e.gates.t_budget}}}};
  j["theory"] = {{"quad_order", e.quad_order}, {"a2_variant", to_string(c.a2_variant)}};
  j["estimator"] = {{"k_list", c.k_list}, {"N_list", c.N_list}, {"n_disorder", c.n_disorder},
                    {"k_max", c.k_max},   {"t_grid", c.t_grid}, {"delta", c.delta}};
  j["sampler"] = {{"two_point", c.two_point}, {"replicas", c.replicas}, {"sweeps", c.sweeps},
                  {"burn_in", c.burn_in},     {"thin", c.thin}};
  j["output"] = {{"path", c.out_path}, {"format", c.format}};
  return j;
}

json to_json(const TheorySolution& s) {
  return {{"p", s.params.p},
          {"beta", s.params.beta},
          {"h", s.params.h},
          {"quad_order", s.quadrature_order},
          {"a2_variant", to_string(s.a2_variant)},
          {"q", s.q},
          {"all_roots", s.all_roots},
          {"q_hat", {{"1", s.q_hat[1]}, {"2", s.q_hat[2]}, {"3", s.q_hat[3]}, {"4", s.q_hat[4]}}},
          {"phi", s.phi},
          {"at_margin", s.at_margin},
          {"beta_H", s.beta_H},
          {"inside_H", s.inside_H},
          {"a2", s.a2},
          {"b2", s.b2},
          {"c2", s.c2},
          {"clt_var", s.clt_var}};
}

json to_json(const NuEstimate& e) {
  return {{"mean", e.mean}, {"std_err", nan_or(e.std_err)}, {"n_disorder", e.n_disorder}, {"source", e.source}};
}

namespace {

json to_json(const ScanRow& r) {
  return {{"N", r.N}, {"stat", r.stat}, {"estimate", to_json(r.estimate)}, {"prediction", nan_or(r.prediction)},
          {"scaled", nan_or(r.scaled)}};
}

json rows_json(const std::vector<ScanRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) a.push_back(to_json(r));
  return a;
}

std::optional<TheorySolution> try_theory(const RunConfig& c) {
  try {
    return solve_theory(thermo(c.model), c.estimator.quad_order, c.a2_variant);
  } catch (const RegimeError&) {
    return std::nullopt;
  }
}

SamplerConfig sampler_config(const RunConfig& c) {
  SamplerConfig s = SamplerConfig::with_defaults(c.model.N, *c.seed, c.estimator.mcmc_retained_sweeps);
  if (c.burn_in >= 0) s.burn_in_sweeps = c.burn_in;
  s.sweeps = c.sweeps > 0 ? c.sweeps : s.burn_in_sweeps + c.estimator.mcmc_retained_sweeps;
  s.thin = c.thin;
  s.kind = c.estimator.dynamics;
  s.validate();
  return s;
}

json dispatch(const RunConfig& c, std::vector<ScanRow>& rows, std::ostream* csv) {
  const std::uint64_t seed = c.seed.value_or(0);
  const std::string& op = c.operation;
  if (op == "theory") return to_json(solve_theory(thermo(c.model), c.estimator.quad_order, c.a2_variant));

  if (op == "exact") {
    const Disorder d = sample_disorder(c.model, seed);
    const ExactSummary s = exact_summary(d, c.model, c.two_point, c.estimator.gates);
    json j{{"log_Z", s.log_Z}, {"p_N", s.log_Z / c.model.N}, {"one_point", s.one_point},
           {"mean_overlap", overlap_moment_exact(s, 1)}};
    if (c.two_point) j["mean_overlap_sq"] = overlap_moment_exact(s, 2);
    return j;
  }
  if (op == "mcmc") {
    const Disorder d = sample_disorder(c.model, seed);
    const ReplicaRun run = run_replicas(d, c.model, c.replicas, sampler_config(c));
    if (csv != nullptr) write_series_csv(*csv, run);
    json pairs = json::array();
    for (const auto& s : run.pairs) {
      json p{{"first", s.first + 1}, {"second", s.second + 1}, {"mean", s.mean()}, {"std_err", s.standard_error()},
             {"length", s.values.size()}};
      if (s.diagnostics) {
        p["tau"] = s.diagnostics->tau;
        p["ess"] = s.diagnostics->ess;
      } else {
        p["tau"] = nullptr;
        p["ess"] = nullptr;
      }
      pairs.push_back(p);
    }
    return {{"dynamics", to_string(c.estimator.dynamics)}, {"pairs", pairs}};
  }
  if (op == "nu_overlap_moments") {
    const auto sol = try_theory(c);
    const auto nu = nu_overlap_moments(c.model, c.k_list, c.n_disorder, c.estimator, seed);
    json out = json::object();
    for (const auto& [k, e] : nu) {
      const double pred = sol ? clt_moment_prediction(k, c.model.N, *sol) : NAN;
      rows.push_back({c.model.N, "moment_" + std::to_string(k), e, pred, std::pow(c.model.N, k / 2.0) * e.mean});
      out[std::to_string(k)] = {{"estimate", to_json(e)}, {"prediction", nan_or(pred)}};
    }
    return {{"q", theory_q(c.model, c.estimator.quad_order)}, {"moments", out}};
  }
  if (op == "self_averaging_scan") {
    const SelfAveragingScan s = self_averaging_scan(c.model, c.N_list, c.n_disorder, c.estimator, seed);
    rows = s.rows;
    return {{"rows", rows_json(s.rows)}, {"slope", s.slope}, {"slope_se", s.slope_se},
            {"bounded_ratio", nan_or(s.bounded_ratio)}};
  }
  if (op == "pn_vs_phi_scan") {
    const PnScan s = pn_vs_phi_scan(c.model, c.N_list, c.n_disorder, c.estimator, seed);
    rows = s.rows;
    return {{"rows", rows_json(s.rows)}, {"phi", s.phi}, {"phi_hat", s.phi_hat}, {"phi_hat_se", s.phi_hat_se},
            {"slope_c", s.slope_c}, {"runs", s.runs}, {"runs_z", s.runs_z}, {"runs_pass", s.runs_pass}};
  }
  if (op == "delta_sq") {
    const DeltaSqResult r = delta_sq_estimate(c.model, c.n_disorder, c.estimator, seed);
    rows.push_back({c.model.N, "delta_sq", r.estimate, r.prediction, c.model.N * r.estimate.mean});
    return {{"estimate", to_json(r.estimate)}, {"prediction", r.prediction}};
  }
  if (op == "clt_moment_check") {
    const CltCheck r = clt_moment_check(c.model, c.k_max, c.n_disorder, c.estimator, seed);
    json ks = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({c.model.N, "moment_" + std::to_string(row.k), row.estimate, row.prediction,
                      std::pow(c.model.N, row.k / 2.0) * row.estimate.mean});
      ks.push_back({{"k", row.k}, {"estimate", to_json(row.estimate)}, {"prediction", row.prediction}});
    }
    json j{{"clt_variance", r.clt_variance}, {"moments", ks}};
    if (c.k_max >= 4) {
      j["kurtosis"] = to_json(r.kurtosis);
      rows.push_back({c.model.N, "kurtosis", r.kurtosis, 3.0, r.kurtosis.mean});
    }
    return j;
  }
  if (op == "cavity_derivative_check") {
    const auto res = cavity_derivative_check(c.model, c.t_grid, c.n_disorder, seed, c.delta, c.estimator.quad_order);
    json a = json::array();
    for (const auto& r : res) {
      std::ostringstream t;
      t << r.t;
      rows.push_back({c.model.N, "finite_difference@" + t.str(), r.finite_difference, r.formula_rhs.mean,
                      r.difference.mean / r.difference.std_err});
      a.push_back({{"t", r.t},
                   {"nu_t", to_json(r.nu_t)},
                   {"finite_difference", to_json(r.finite_difference)},
                   {"formula_rhs", to_json(r.formula_rhs)},
                   {"difference", to_json(r.difference)}});
    }
    return {{"rows", a}, {"delta", c.delta}};
  }
  throw UsageError("unknown operation '" + op + "'");
}

}  // namespace

json execute(const RunConfig& c, std::ostream* csv) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<ScanRow> rows;
  const bool series_csv = c.operation == "mcmc" && c.format == "csv";
  json payload = dispatch(c, rows, series_csv ? csv : nullptr);
  if (c.format == "csv" && !series_csv && csv != nullptr) {
    if (rows.empty()) throw UsageError("operation '" + c.operation + "' has no CSV form");
    write_scan_csv(*csv, rows);
  }
  const ThermoParams tp = thermo(c.model);
  const QuadratureRule& rule = cached_rule(c.estimator.quad_order);
  const double margin = at_margin(tp, solve_q(tp, rule).principal, rule);
  const bool rigorous = c.model.beta <= beta_H(c.model.p);

  json record;
  record["toolkit"] = "pspin";
  record["version"] = kToolkitVersion;
  record["config"] = to_json(c);
  record["rigorous_regime"] = rigorous;
  record["at_region"] = margin > 0.0;
  if (!rigorous) record["note"] = "outside rigorous regime";
  record["results"] = payload;
  if (c.operation != "theory") {
    record["timing_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return record;
}

namespace {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) != nullptr) return kExitUsage;
  if (dynamic_cast<const ResourceLimitError*>(&e) != nullptr) return kExitResource;
  if (dynamic_cast<const json::exception*>(&e) != nullptr) return kExitUsage;
  return kExitNumerical;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("invalid integer list '" + text + "'");
    }
  }
  return out;
}

void emit(const RunConfig& c, const std::function<void(std::ostream&)>& body, std::ostream& out) {
  if (c.out_path.empty()) {
    body(out);
    return;
  }
  std::ofstream file(c.out_path);
  if (!file) throw UsageError("cannot open output file '" + c.out_path + "'");
  body(file);
}

void run_config(const RunConfig& c, std::ostream& out) {
  c.validate();
  emit(c,
       [&](std::ostream& os) {
         std::ostringstream csv;
         const json record = execute(c, &csv);
         if (c.format == "csv") {
           os << csv.str();
         } else {
           os << record.dump(2) << '\n';
         }
       },
       out);
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"p-spin spin-glass theory and simulation toolkit"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolkitVersion);

  RunConfig cfg;
  std::uint64_t seed = 0;
  std::string engine = "exact", variant = "proof", dynamics = "glauber", n_list, k_list, level = "quick", stat;
  bool with_beta_at = false;
  AcceptanceOptions acc;

  auto model_flags = [&](CLI::App* sub, bool need_N) {
    sub->add_option("--p", cfg.model.p, "interaction order")->required();
    sub->add_option("--beta", cfg.model.beta, "inverse temperature")->required();
    sub->add_option("--h", cfg.model.h, "external field (> 0)")->required();
    if (need_N) sub->add_option("--N", cfg.model.N, "number of spins")->required();
    sub->add_option("--quad-order", cfg.estimator.quad_order, "Gauss-Hermite order")->capture_default_str();
    sub->add_option("--a2-variant", variant, "proof or printed")->check(CLI::IsMember({"proof", "printed"}));
    sub->add_option("--out", cfg.out_path, "output file (default stdout)");
  };
  auto seed_flag = [&](CLI::App* sub) { sub->add_option("--seed", seed, "64-bit master seed")->required(); };
  auto engine_flags = [&](CLI::App* sub) {
    sub->add_option("--n-disorder", cfg.n_disorder, "independent disorder draws")->capture_default_str();
    sub->add_option("--engine", engine, "exact or mcmc")->check(CLI::IsMember({"exact", "mcmc"}));
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--samples", cfg.estimator.exact_samples, "exact replica samples per draw");
    sub->add_flag("--antithetic", cfg.estimator.antithetic, "pair each draw with its negated couplings");
  };

  CLI::App* theory = app.add_subcommand("theory", "replica-symmetric predictions for (p, beta, h)");
  model_flags(theory, false);
  theory->add_flag("--beta-at", with_beta_at, "also locate the AT crossing in beta");

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "execute a JSON run configuration");
  std::optional<std::string> run_out, run_format;
  run->add_option("config", config_path, "configuration file or result record")->required();
  run->add_option("--out", run_out, "override the configured output file (- for stdout)");
  run->add_option("--format", run_format, "override the configured format")->check(CLI::IsMember({"json", "csv"}));

  CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}))->capture_default_str();
  verify->add_option("--seed", acc.seed, "master seed")->capture_default_str();
  verify->add_option("--a2-variant", variant, "proof or printed")->check(CLI::IsMember({"proof", "printed"}));
  verify->add_option("--quad-order", acc.quad_order, "Gauss-Hermite order");
  verify->add_option("--only", acc.only, "criterion ids to run")->delimiter(',');

  CLI::App* exact = app.add_subcommand("exact", "exact enumeration for one disorder draw");
  model_flags(exact, true);
  seed_flag(exact);
  exact->add_flag("!--no-two-point", cfg.two_point, "skip the two-point correlations");

  CLI::App* mcmc = app.add_subcommand("mcmc", "replica chains for one disorder draw");
  model_flags(mcmc, true);
  seed_flag(mcmc);
  mcmc->add_option("--replicas", cfg.replicas, "number of chains")->capture_default_str();
  mcmc->add_option("--sweeps", cfg.sweeps, "total sweeps (default burn-in plus 10000)");
  mcmc->add_option("--burn-in", cfg.burn_in, "burn-in sweeps (default 100 N)");
  mcmc->add_option("--thin", cfg.thin, "keep every thin-th sweep")->capture_default_str();
  mcmc->add_option("--dynamics", dynamics, "glauber or metropolis")->check(CLI::IsMember({"glauber", "metropolis"}));
  mcmc->add_option("--format", cfg.format, "json, or csv for the raw overlap series")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* scan = app.add_subcommand("scan", "estimator runs over disorder draws");
  model_flags(scan, false);
  seed_flag(scan);
  engine_flags(scan);
  scan->add_option("--stat", stat, "self_averaging, free_energy, moments, delta_sq, clt or cavity")
      ->required()
      ->check(CLI::IsMember({"self_averaging", "free_energy", "moments", "delta_sq", "clt", "cavity"}));
  scan->add_option("--N", n_list, "size, or comma-separated sizes for scans")->required();
  scan->add_option("--k", k_list, "comma-separated moment orders (moments)");
  scan->add_option("--k-max", cfg.k_max, "highest moment (clt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolkitVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front()) err << sub->help();
    return kExitUsage;
  }

  try {
    cfg.a2_variant = parse_a2_variant(variant);
    cfg.estimator.engine = parse_engine(engine);
    cfg.estimator.dynamics = parse_dynamics(dynamics);
    if (theory->parsed()) {
      cfg.operation = "theory";
      emit(cfg,
           [&](std::ostream& os) {
             json record = execute(cfg, nullptr);
             if (with_beta_at) {
               const auto b = beta_at(cfg.model.p, cfg.model.h, cached_rule(cfg.estimator.quad_order));
               record["results"]["beta_at"] = b ? json(*b) : json("unbounded");
             }
             os << record.dump(2) << '\n';
           },
           out);
      return kExitOk;
    }
    if (run->parsed()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read configuration '" + config_path + "'");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw UsageError(std::string("configuration is not valid JSON: ") + e.what());
      }
      if (j.contains("config") && j.contains("results")) j = j.at("config");
      RunConfig c = run_config_from_json(j);
      if (run_out) c.out_path = *run_out == "-" ? "" : *run_out;
      if (run_format) c.format = *run_format;
      run_config(c, out);
      return kExitOk;
    }
    if (verify->parsed()) {
      acc.level = parse_level(level);
      acc.a2_variant = cfg.a2_variant;
      const auto results = run_acceptance(acc, out);
      const bool ok = std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
      return ok ? kExitOk : kExitNumerical;
    }
    cfg.seed = seed;
    if (exact->parsed()) {
      cfg.operation = "exact";
    } else if (mcmc->parsed()) {
      cfg.operation = "mcmc";
    } else if (scan->parsed()) {
      const std::vector<int> sizes = parse_int_list(n_list);
      if (sizes.empty()) throw UsageError("--N must not be empty");
      if (stat == "self_averaging" || stat == "free_energy") {
        cfg.operation = stat == "self_averaging" ? "self_averaging_scan" : "pn_vs_phi_scan";
        cfg.N_list = sizes;
      } else {
        if (sizes.size() != 1) throw UsageError("--stat " + stat + " takes a single --N");
        cfg.operation = stat == "moments" ? "nu_overlap_moments"
                        : stat == "delta_sq" ? "delta_sq"
                        : stat == "clt"      ? "clt_moment_check"
                                             : "cavity_derivative_check";
      }
      cfg.model.N = sizes.front();
      if (!k_list.empty()) cfg.k_list = parse_int_list(k_list);
    }
    run_config(cfg, out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace pspin
