#pragma once

// Subcommand implementations behind the `fracepi` command-line tool.
// Every subcommand writes its artifacts plus manifest_<subcommand>.json into
// the output directory. On failure, files written so far are removed and a
// single `error: kind=... message=...` line is printed.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracepi/artifacts.hpp"
#include "fracepi/calibration.hpp"
#include "fracepi/config.hpp"
#include "fracepi/costeff.hpp"
#include "fracepi/epimodels.hpp"
#include "fracepi/error.hpp"
#include "fracepi/focp.hpp"
#include "fracepi/plots.hpp"

namespace fracepi {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitUnconverged = 4 };

struct AppOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<double> alpha;
  std::uint64_t seed = 1;
  std::vector<std::string> inputs;  // costeff: optimize output directories
};

/// Parses the config (defaults when no path) and applies command-line overrides.
inline RunConfig load_run_config(const AppOptions& opts) {
  RunConfig cfg = opts.config_path ? parse_config(*opts.config_path) : parse_config_text("");
  if (opts.alpha) {
    cfg.params.alpha = *opts.alpha;
    cfg.defaulted.erase("params.alpha");
  }
  if (opts.out_dir) {
    cfg.output_dir = *opts.out_dir;
    cfg.defaulted.erase("output.dir");
  }
  validate(cfg);
  return cfg;
}

namespace app_detail {

inline std::string label_for_alpha(double alpha) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "alpha=%.6g", alpha);
  return buf;
}

inline std::vector<std::string> column_names(ModelKind m) {
  return m == ModelKind::SEIRS ? std::vector<std::string>{"S", "E", "I", "R"}
                               : std::vector<std::string>{"S", "I", "R"};
}

struct Manifest {
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  void add_input(const std::string& path) {
    inputs.push_back({{"path", path}, {"fnv1a64", fnv1a_hex(read_file(path))}});
  }

  void write(ArtifactWriter& writer, const std::string& subcommand, const RunConfig& cfg) const {
    nlohmann::ordered_json m;
    m["tool"] = "fracepi";
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    const std::string cfg_text = serialize_config(cfg);
    m["config_fnv1a64"] = fnv1a_hex(cfg_text);
    m["config"] = cfg_text;
    m["defaults_used"] = std::vector<std::string>(cfg.defaulted.begin(), cfg.defaulted.end());
    m["inputs"] = inputs;
    nlohmann::ordered_json arts = nlohmann::ordered_json::array();
    for (const auto& f : writer.files()) arts.push_back({{"name", f.name}, {"fnv1a64", f.hash}});
    m["artifacts"] = arts;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
#if defined(__VERSION__)
    m["build"] = {{"compiler", __VERSION__}, {"cplusplus", static_cast<long>(__cplusplus)}};
#endif
    writer.write("manifest_" + subcommand + ".json", m.dump(2) + "\n");
  }
};

inline std::string efficacy_csv(const Trajectory& state, double I0) {
  const auto F = efficacy_series(state, I0);
  std::ostringstream o;
  o << "t,F\n";
  for (std::size_t k = 0; k < F.size(); ++k) o << format_real(state.grid().time(k)) << ',' << format_real(F[k]) << '\n';
  return o.str();
}

inline int run_simulate(const RunConfig& cfg, ArtifactWriter& w, std::ostream& out) {
  const auto traj = simulate(cfg.model, cfg.params, cfg.initial(), cfg.grid());
  w.write("trajectory.csv", trajectory_csv(traj, column_names(cfg.model)));
  Manifest{}.write(w, "simulate", cfg);
  out << "simulate: " << traj.size() << " nodes written to " << (w.dir() / "trajectory.csv").string() << '\n';
  return kExitOk;
}

inline int run_equilibrium(const RunConfig& cfg, ArtifactWriter& w, std::ostream& out) {
  const auto eq = fitting_initial_state(cfg.model, cfg.params);
  const double r0 = cfg.model == ModelKind::SEIRS ? basic_reproduction_number(cfg.params)
                                                  : cfg.params.b0 / (cfg.params.mu + cfg.params.nu);
  std::ostringstream csv;
  const auto names = column_names(cfg.model);
  for (const auto& n : names) csv << n << ',';
  csv << "R0\n";
  for (double v : eq) csv << format_real(v) << ',';
  csv << format_real(r0) << '\n';
  w.write("equilibrium.csv", csv.str());
  Manifest{}.write(w, "equilibrium", cfg);

  char buf[32];
  out << '(';
  for (std::size_t i = 0; i < eq.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4f", eq[i]);
    out << (i ? ", " : "") << buf;
  }
  out << ")\n";
  return kExitOk;
}

inline int run_fit(const RunConfig& cfg, const AppOptions& opts, ArtifactWriter& w, std::ostream& out) {
  if (!cfg.fit.population_scale) throw ConfigError("fit.population_scale", "missing required field");
  Manifest manifest;
  CaseSeries series;
  if (!cfg.fit.data.empty()) {
    series = load_case_series(cfg.fit.data, *cfg.fit.population_scale);
    manifest.add_input(cfg.fit.data);
  } else {
    ModelParams gen = cfg.params;
    gen.alpha = cfg.fit.synthetic_alpha;
    const auto y0 = fitting_initial_state(cfg.model, gen);
    series = synth_series(cfg.model, gen, y0, cfg.fit.synthetic_months, *cfg.fit.population_scale,
                          cfg.fit.synthetic_noise, opts.seed, cfg.fit.steps_per_month);
    std::ostringstream data;
    write_case_series(data, series);
    w.write("fit_data.csv", data.str());
    manifest.extra["seed"] = opts.seed;
  }

  const bool rescale = cfg.fit.initial == FitInitial::Rescaled;
  const auto y0 = fitting_initial_state(cfg.model, cfg.params, rescale ? &series : nullptr);
  AlphaSearch search{cfg.fit.alpha_min, cfg.fit.alpha_step, cfg.fit.refine_tol, cfg.fit.steps_per_month,
                     cfg.fit.reference_population};
  const FitResult fit = fit_alpha(cfg.model, cfg.params, y0, series, search);

  ModelParams best = cfg.params;
  best.alpha = fit.best_alpha;
  const auto traj = simulate(cfg.model, best, y0, monthly_grid(series.months(), cfg.fit.steps_per_month));
  const auto model = sample_monthly(traj, infectious_index(cfg.model), series.months(), series.population_scale);
  const int start = *detail::parse_month(series.start_label);
  std::ostringstream s;
  s << "index,month,cases,model\n";
  for (std::size_t k = 0; k < model.size(); ++k)
    s << k << ',' << detail::format_month(start + static_cast<int>(k)) << ',' << format_real(series.counts[k]) << ','
      << format_real(model[k]) << '\n';

  w.write("fit_evaluations.csv", fit_evaluations_csv(fit));
  w.write("fit_summary.csv", fit_summary_csv(fit));
  w.write("fit_series.csv", s.str());
  manifest.write(w, "fit", cfg);

  char buf[160];
  std::snprintf(buf, sizeof buf, "fit: best_alpha=%.4f error=%.6g relative_error=%.6g%% probes=%zu\n", fit.best_alpha,
                fit.error, fit.relative_error, fit.evaluations.size());
  out << buf;
  return kExitOk;
}

inline std::string sensitivity_csv(const std::string& key, const std::vector<double>& values,
                                   const std::vector<FocpSolution>& sols, double I0) {
  std::ostringstream o;
  o << 't';
  char buf[48];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%s=%g", key.c_str(), v);
    o << ',' << buf;
  }
  o << '\n';
  std::vector<std::vector<double>> F;
  for (const auto& s : sols) F.push_back(efficacy_series(s.state, I0));
  const Grid& g = sols.front().state.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    o << format_real(g.time(k));
    for (const auto& f : F) o << ',' << format_real(f[k]);
    o << '\n';
  }
  return o.str();
}

inline int run_optimize(const RunConfig& cfg, ArtifactWriter& w, std::ostream& out) {
  if (cfg.model != ModelKind::SEIRS) throw ConfigError("model", "optimize requires the SEIRS model");
  const auto init = cfg.initial();
  const SeirsState y0 = SeirsState::from(init);
  if (!(y0.I > 0.0)) throw ConfigError("initial.I", "must be positive for efficacy and cost-effectiveness");
  const Grid grid = cfg.grid();

  auto solve = [&](ControlWeights weights) { return solve_focp(cfg.params, y0, weights, grid, cfg.sweep); };

  // Sensitivity runs are independent sweeps; run them alongside the main one.
  std::vector<std::future<FocpSolution>> k2_runs, k1_runs;
  for (double k2 : cfg.sensitivity_kappa2) {
    ControlWeights wk = cfg.weights;
    wk.kappa2 = k2;
    k2_runs.push_back(std::async(std::launch::async, solve, wk));
  }
  for (double k1 : cfg.sensitivity_kappa1) {
    ControlWeights wk = cfg.weights;
    wk.kappa1 = k1;
    k1_runs.push_back(std::async(std::launch::async, solve, wk));
  }
  const FocpSolution sol = solve(cfg.weights);
  auto collect = [](std::vector<std::future<FocpSolution>>& fs) {
    std::vector<FocpSolution> v;
    for (auto& f : fs) v.push_back(f.get());
    return v;
  };
  const auto k2_sols = collect(k2_runs);
  const auto k1_sols = collect(k1_runs);

  bool all_converged = sol.converged;
  for (const auto& s : k2_sols) all_converged = all_converged && s.converged;
  for (const auto& s : k1_sols) all_converged = all_converged && s.converged;

  w.write("focp.csv", focp_csv(sol));
  w.write("focp_summary.csv", focp_summary_csv(sol));
  w.write("efficacy.csv", efficacy_csv(sol.state, y0.I));
  if (!k2_sols.empty()) w.write("sensitivity_kappa2.csv", sensitivity_csv("kappa2", cfg.sensitivity_kappa2, k2_sols, y0.I));
  if (!k1_sols.empty()) w.write("sensitivity_kappa1.csv", sensitivity_csv("kappa1", cfg.sensitivity_kappa1, k1_sols, y0.I));

  nlohmann::ordered_json run;
  run["label"] = label_for_alpha(cfg.params.alpha);
  run["alpha"] = cfg.params.alpha;
  run["I0"] = y0.I;
  run["unit_cost"] = cfg.weights.unit_cost;
  run["objective"] = sol.objective;
  run["iterations"] = sol.iterations;
  run["final_residual"] = sol.final_residual();
  run["converged"] = sol.converged;
  w.write("run.json", run.dump(2) + "\n");

  Manifest manifest;
  manifest.extra["converged"] = all_converged;
  manifest.write(w, "optimize", cfg);

  char buf[200];
  std::snprintf(buf, sizeof buf, "optimize: objective=%.10g iterations=%zu residual=%.3g converged=%s\n", sol.objective,
                sol.iterations, sol.final_residual(), sol.converged ? "true" : "false");
  out << buf;
  return all_converged ? kExitOk : kExitUnconverged;
}

inline Strategy load_strategy(const std::filesystem::path& dir, Manifest& manifest) {
  const auto run_path = dir / "run.json";
  const auto csv_path = dir / "focp.csv";
  const std::string run_text = read_file(run_path);
  const std::string csv_text = read_file(csv_path);
  manifest.inputs.push_back({{"path", run_path.string()}, {"fnv1a64", fnv1a_hex(run_text)}});
  manifest.inputs.push_back({{"path", csv_path.string()}, {"fnv1a64", fnv1a_hex(csv_text)}});
  nlohmann::json run;
  try {
    run = nlohmann::json::parse(run_text);
    auto rec = parse_focp_csv(csv_text, csv_path.string());
    return Strategy{run.at("label").get<std::string>(), std::move(rec.state), std::move(rec.control),
                    run.at("I0").get<double>(), run.at("unit_cost").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(run_path.string() + ": " + e.what());
  }
}

inline int run_costeff(const RunConfig& cfg, const AppOptions& opts, ArtifactWriter& w, std::ostream& out) {
  std::vector<std::string> inputs = opts.inputs;
  if (inputs.empty()) inputs.push_back(w.dir().string());
  Manifest manifest;
  std::vector<StrategySummary> summaries;
  for (const auto& in : inputs) summaries.push_back(summarize(load_strategy(in, manifest)));

  CostEffReport report;
  if (summaries.size() == 1) {
    const auto& s = summaries.front();
    report.rows.push_back({s.label, s.A, s.TC, s.ACER, s.Fbar, s.ACER, s.A < 0 ? "harmful" : ""});
  } else {
    report = icer_rank(summaries);
  }
  w.write("costeff.csv", report_csv(report));
  if (cfg.costeff_population_scale) {
    CostEffReport counts = report;
    for (auto& r : counts.rows) {
      r.A *= *cfg.costeff_population_scale;
      r.TC *= *cfg.costeff_population_scale;
    }
    w.write("costeff_counts.csv", report_csv(counts));
  }
  manifest.write(w, "costeff", cfg);

  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-16s A=%.6g TC=%.6g ACER=%.4g Fbar=%.5g ICER=%.4g", r.label.c_str(), r.A, r.TC,
                  r.ACER, r.Fbar, r.ICER);
    out << buf;
    if (cfg.costeff_population_scale) {
      std::snprintf(buf, sizeof buf, " A[count]=%.6g TC[count]=%.6g", r.A * *cfg.costeff_population_scale,
                    r.TC * *cfg.costeff_population_scale);
      out << buf;
    }
    if (!r.note.empty()) out << " (" << r.note << ")";
    out << '\n';
  }
  return kExitOk;
}

inline int run_plots(const RunConfig& cfg, ArtifactWriter& w, std::ostream& out) {
  const auto scripts = emit_plots(w);
  Manifest{}.write(w, "plots", cfg);
  for (const auto& s : scripts) out << "plots: " << (w.dir() / "plots" / s).string() << '\n';
  return kExitOk;
}

inline void report_error(std::ostream& err, const char* kind, const std::string& message, const std::string& key = {}) {
  std::string flat = message;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  err << "error: kind=" << kind;
  if (!key.empty()) err << " key=" << key;
  err << " message=" << flat << '\n';
}

}  // namespace app_detail

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"simulate", "equilibrium", "fit", "optimize", "costeff", "plots"};
  return names;
}

/// Runs one subcommand against an already-validated configuration.
inline int dispatch(const std::string& subcommand, const RunConfig& cfg, const AppOptions& opts,
                    std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace app_detail;
  try {
    ArtifactWriter writer(cfg.output_dir);
    int code = kExitOk;
    if (subcommand == "simulate")
      code = run_simulate(cfg, writer, out);
    else if (subcommand == "equilibrium")
      code = run_equilibrium(cfg, writer, out);
    else if (subcommand == "fit")
      code = run_fit(cfg, opts, writer, out);
    else if (subcommand == "optimize")
      code = run_optimize(cfg, writer, out);
    else if (subcommand == "costeff")
      code = run_costeff(cfg, opts, writer, out);
    else if (subcommand == "plots")
      code = run_plots(cfg, writer, out);
    else
      throw ConfigError("", "unknown subcommand '" + subcommand + "'");
    writer.commit();
    return code;
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what(), e.key());
    return kExitConfig;
  } catch (const DataError& e) {
    report_error(err, "data", e.what());
    return kExitConfig;
  } catch (const MissingArtifacts& e) {
    report_error(err, "missing_artifact", e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    report_error(err, "domain", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    report_error(err, "numerical", e.what());
    return kExitNumerical;
  }
}

/// Loads the configuration and dispatches; configuration errors exit with 2.
inline int run_cli(const std::string& subcommand, const AppOptions& opts, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  RunConfig cfg;
  try {
    cfg = load_run_config(opts);
  } catch (const ConfigError& e) {
    app_detail::report_error(err, "config", e.what(), e.key());
    return kExitConfig;
  } catch (const DomainError& e) {
    app_detail::report_error(err, "config", e.what());
    return kExitConfig;
  }
  return dispatch(subcommand, cfg, opts, out, err);
}

}  // namespace fracepi
