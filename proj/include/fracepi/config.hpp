#pragma once

// Run configuration: a flat `key = value` text file with dotted section keys.
// Lines starting with '#' are comments. Unknown and duplicate keys are
// rejected; every value is range-checked here so no module precondition can
// be violated downstream.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fracepi/calibration.hpp"
#include "fracepi/epimodels.hpp"
#include "fracepi/error.hpp"
#include "fracepi/focp.hpp"

namespace fracepi {

enum class InitialMode { Equilibrium, Explicit };
enum class FitInitial { Equilibrium, Rescaled };

struct FitConfig {
  std::string data;  // empty: synthetic data
  std::optional<double> population_scale;
  std::optional<double> reference_population;
  double alpha_min = 0.5;
  double alpha_step = 0.005;
  double refine_tol = 5e-4;
  std::size_t steps_per_month = 17;
  FitInitial initial = FitInitial::Equilibrium;
  double synthetic_alpha = 0.95;
  std::size_t synthetic_months = 35;
  double synthetic_noise = 0.0;

  friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

struct RunConfig {
  ModelKind model = ModelKind::SEIRS;
  ModelParams params;
  InitialMode initial_mode = InitialMode::Equilibrium;
  std::vector<double> initial_state;  // explicit mode only
  double t0 = 0.0;
  double tf = 5.0;
  std::size_t n_steps = 1000;
  ControlWeights weights;
  SweepSettings sweep;
  FitConfig fit;
  std::optional<double> costeff_population_scale;
  std::vector<double> sensitivity_kappa1{0.1, 1.0, 10.0};
  std::vector<double> sensitivity_kappa2{0.01, 0.001, 0.0001};
  std::string output_dir = "out";
  /// Keys whose values came from defaults (not written by the user).
  std::set<std::string> defaulted;

  Grid grid() const { return Grid(t0, tf, n_steps); }

  /// Initial state for simulation and control runs.
  std::vector<double> initial() const {
    if (initial_mode == InitialMode::Explicit) return initial_state;
    return fitting_initial_state(model, params);
  }

  bool operator==(const RunConfig& o) const {
    return model == o.model && params == o.params && initial_mode == o.initial_mode &&
           initial_state == o.initial_state && t0 == o.t0 && tf == o.tf && n_steps == o.n_steps &&
           weights.kappa1 == o.weights.kappa1 && weights.kappa2 == o.weights.kappa2 &&
           weights.t_max == o.weights.t_max && weights.unit_cost == o.weights.unit_cost &&
           sweep.relaxation == o.sweep.relaxation && sweep.tol == o.sweep.tol && sweep.max_iter == o.sweep.max_iter &&
           fit == o.fit && costeff_population_scale == o.costeff_population_scale &&
           sensitivity_kappa1 == o.sensitivity_kappa1 && sensitivity_kappa2 == o.sensitivity_kappa2 &&
           output_dir == o.output_dir;
  }
};

/// Defaults: SEIRS with the HRSV parameter set, phase pi/2,
/// alpha = 0.993 and the treatment weights kappa1 = 1, kappa2 = 0.001.
inline ModelParams default_params(ModelKind model) {
  ModelParams p = model == ModelKind::SIRS ? ModelParams::sirs_hrsv() : ModelParams::seirs_hrsv();
  p.phi = std::numbers::pi / 2.0;
  p.alpha = 0.993;
  return p;
}

namespace config_detail {

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "model",
      "params.mu", "params.nu", "params.gamma", "params.epsilon", "params.b0", "params.b1", "params.c1",
      "params.phi", "params.alpha",
      "initial.mode", "initial.S", "initial.E", "initial.I", "initial.R",
      "grid.t0", "grid.tf", "grid.n_steps",
      "control.kappa1", "control.kappa2", "control.t_max", "control.unit_cost",
      "sweep.relaxation", "sweep.tol", "sweep.max_iter",
      "fit.data", "fit.population_scale", "fit.reference_population", "fit.alpha_min", "fit.alpha_step",
      "fit.refine_tol", "fit.steps_per_month", "fit.initial", "fit.synthetic_alpha", "fit.synthetic_months",
      "fit.synthetic_noise",
      "costeff.population_scale",
      "sensitivity.kappa1", "sensitivity.kappa2",
      "output.dir",
  };
  return keys;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& key, std::string_view text) {
  text = detail::trim(text);
  // Multiples of pi: "pi", "pi/2", "7pi/5", "7*pi/5".
  if (auto pos = text.find("pi"); pos != std::string_view::npos) {
    std::string_view coef = detail::trim(text.substr(0, pos));
    std::string_view rest = detail::trim(text.substr(pos + 2));
    if (!coef.empty() && coef.back() == '*') coef = detail::trim(coef.substr(0, coef.size() - 1));
    double c = 1.0, d = 1.0;
    if (!coef.empty()) {
      auto v = detail::parse_double(coef);
      if (!v) throw ConfigError(key, "cannot parse '" + std::string(text) + "' as a number");
      c = *v;
    }
    if (!rest.empty()) {
      if (rest.front() != '/') throw ConfigError(key, "cannot parse '" + std::string(text) + "' as a number");
      auto v = detail::parse_double(rest.substr(1));
      if (!v || *v == 0.0) throw ConfigError(key, "cannot parse '" + std::string(text) + "' as a number");
      d = *v;
    }
    return c * std::numbers::pi / d;
  }
  auto v = detail::parse_double(text);
  if (!v) throw ConfigError(key, "cannot parse '" + std::string(text) + "' as a number");
  return *v;
}

inline std::size_t parse_count(const std::string& key, std::string_view text) {
  text = detail::trim(text);
  if (!text.empty() && text.front() == '-') throw ConfigError(key, "must be a non-negative integer");
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(key, "cannot parse '" + std::string(text) + "' as an integer");
  return v;
}

inline std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  text = detail::trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_real(key, text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace config_detail

/// Checks every value against the domain of the module that consumes it.
inline void validate(const RunConfig& c) {
  using config_detail::check;
  using config_detail::finite;
  const auto& p = c.params;
  const bool seirs = c.model == ModelKind::SEIRS;
  check(finite(p.mu) && p.mu >= 0, "params.mu", "must be a finite rate >= 0");
  check(finite(p.nu) && p.nu >= 0, "params.nu", "must be a finite rate >= 0");
  check(finite(p.gamma) && p.gamma >= 0, "params.gamma", "must be a finite rate >= 0");
  check(finite(p.epsilon) && p.epsilon >= 0, "params.epsilon", "must be a finite rate >= 0");
  check(finite(p.b0) && p.b0 >= 0, "params.b0", "must be a finite rate >= 0");
  check(p.b1 >= 0 && p.b1 < 1, "params.b1", "must lie in [0, 1)");
  check(p.c1 >= 0 && p.c1 < 1, "params.c1", "must lie in [0, 1)");
  check(finite(p.phi), "params.phi", "must be finite");
  check(p.alpha > 0 && p.alpha <= 1, "params.alpha", "must lie in (0, 1]");

  if (c.initial_mode == InitialMode::Explicit) {
    check(c.initial_state.size() == dimension(c.model), "initial.mode",
          "explicit initial state needs every compartment of the model");
    for (double v : c.initial_state) check(finite(v) && v >= 0, "initial", "components must be finite and >= 0");
  } else {
    const double r0 = seirs ? basic_reproduction_number(p) : p.b0 / (p.mu + p.nu);
    check(r0 > 1.0, "initial.mode", "equilibrium initial state requires R0 > 1 (R0 = " + config_detail::fmt(r0) + ")");
    check(p.mu > 0, "params.mu", "equilibrium initial state requires mu > 0");
  }

  check(finite(c.t0), "grid.t0", "must be finite");
  check(finite(c.tf) && c.tf > c.t0, "grid.tf", "must exceed grid.t0");
  check(c.n_steps >= 1, "grid.n_steps", "must be >= 1");

  check(finite(c.weights.kappa1) && c.weights.kappa1 >= 0, "control.kappa1", "must be finite and >= 0");
  check(finite(c.weights.kappa2) && c.weights.kappa2 > 0, "control.kappa2", "must be finite and > 0");
  check(finite(c.weights.t_max) && c.weights.t_max > 0, "control.t_max", "must be finite and > 0");
  check(finite(c.weights.unit_cost) && c.weights.unit_cost >= 0, "control.unit_cost", "must be finite and >= 0");

  check(c.sweep.relaxation > 0 && c.sweep.relaxation <= 1, "sweep.relaxation", "must lie in (0, 1]");
  check(finite(c.sweep.tol) && c.sweep.tol > 0, "sweep.tol", "must be finite and > 0");
  check(c.sweep.max_iter >= 1, "sweep.max_iter", "must be >= 1");

  const auto& f = c.fit;
  if (f.population_scale) check(finite(*f.population_scale) && *f.population_scale > 0, "fit.population_scale", "must be > 0");
  if (f.reference_population)
    check(finite(*f.reference_population) && *f.reference_population > 0, "fit.reference_population", "must be > 0");
  check(f.alpha_min > 0 && f.alpha_min <= 1, "fit.alpha_min", "must lie in (0, 1]");
  check(finite(f.alpha_step) && f.alpha_step > 0, "fit.alpha_step", "must be finite and > 0");
  check(finite(f.refine_tol) && f.refine_tol > 0, "fit.refine_tol", "must be finite and > 0");
  check(f.steps_per_month >= 1, "fit.steps_per_month", "must be >= 1");
  check(f.synthetic_alpha > 0 && f.synthetic_alpha <= 1, "fit.synthetic_alpha", "must lie in (0, 1]");
  check(f.synthetic_months >= 2, "fit.synthetic_months", "must be >= 2");
  check(finite(f.synthetic_noise) && f.synthetic_noise >= 0, "fit.synthetic_noise", "must be finite and >= 0");

  if (c.costeff_population_scale)
    check(finite(*c.costeff_population_scale) && *c.costeff_population_scale > 0, "costeff.population_scale",
          "must be > 0");
  for (double k : c.sensitivity_kappa1) check(finite(k) && k >= 0, "sensitivity.kappa1", "entries must be finite and >= 0");
  for (double k : c.sensitivity_kappa2) check(finite(k) && k > 0, "sensitivity.kappa2", "entries must be finite and > 0");
  check(!c.output_dir.empty(), "output.dir", "must not be empty");
}

/// Parses configuration text. `origin` is used in error messages only.
inline RunConfig parse_config_text(std::string_view text, const std::string& origin = "<config>") {
  using namespace config_detail;
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = detail::trim(line);
    if (row.empty() || row.front() == '#') continue;
    const auto eq = row.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key(detail::trim(row.substr(0, eq)));
    std::string value(detail::trim(row.substr(eq + 1)));
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw ConfigError(key, "unknown key");
    if (!kv.emplace(key, value).second) throw ConfigError(key, "duplicate key");
  }

  RunConfig c;
  if (auto it = kv.find("model"); it != kv.end()) {
    if (it->second == "SEIRS" || it->second == "seirs")
      c.model = ModelKind::SEIRS;
    else if (it->second == "SIRS" || it->second == "sirs")
      c.model = ModelKind::SIRS;
    else
      throw ConfigError("model", "must be SIRS or SEIRS");
  }
  c.params = default_params(c.model);

  auto real = [&](const std::string& key, double& dst) {
    if (auto it = kv.find(key); it != kv.end()) dst = parse_real(key, it->second);
  };
  auto count = [&](const std::string& key, std::size_t& dst) {
    if (auto it = kv.find(key); it != kv.end()) dst = parse_count(key, it->second);
  };
  auto opt_real = [&](const std::string& key, std::optional<double>& dst) {
    if (auto it = kv.find(key); it != kv.end()) dst = parse_real(key, it->second);
  };

  real("params.mu", c.params.mu);
  real("params.nu", c.params.nu);
  real("params.gamma", c.params.gamma);
  real("params.b0", c.params.b0);
  real("params.b1", c.params.b1);
  real("params.phi", c.params.phi);
  if (c.model == ModelKind::SEIRS) {
    real("params.epsilon", c.params.epsilon);
    real("params.c1", c.params.c1);
  } else {
    for (const char* k : {"params.epsilon", "params.c1", "initial.E"})
      if (kv.count(k)) throw ConfigError(k, "not a parameter of the SIRS model");
  }
  if (auto it = kv.find("params.alpha"); it != kv.end()) {
    c.params.alpha = parse_real("params.alpha", it->second);
    if (!(c.params.alpha > 0 && c.params.alpha <= 1)) throw ConfigError("params.alpha", "must lie in (0, 1]");
  }

  if (auto it = kv.find("initial.mode"); it != kv.end()) {
    if (it->second == "equilibrium")
      c.initial_mode = InitialMode::Equilibrium;
    else if (it->second == "explicit")
      c.initial_mode = InitialMode::Explicit;
    else
      throw ConfigError("initial.mode", "must be 'equilibrium' or 'explicit'");
  }
  const std::vector<std::string> comps = c.model == ModelKind::SEIRS
                                             ? std::vector<std::string>{"initial.S", "initial.E", "initial.I", "initial.R"}
                                             : std::vector<std::string>{"initial.S", "initial.I", "initial.R"};
  if (c.initial_mode == InitialMode::Explicit) {
    for (const auto& k : comps) {
      auto it = kv.find(k);
      if (it == kv.end()) throw ConfigError(k, "missing required field for explicit initial state");
      c.initial_state.push_back(parse_real(k, it->second));
    }
  } else {
    for (const auto& k : comps)
      if (kv.count(k)) throw ConfigError(k, "set initial.mode = explicit to give initial compartments");
  }

  real("grid.t0", c.t0);
  real("grid.tf", c.tf);
  count("grid.n_steps", c.n_steps);
  real("control.kappa1", c.weights.kappa1);
  real("control.kappa2", c.weights.kappa2);
  real("control.t_max", c.weights.t_max);
  real("control.unit_cost", c.weights.unit_cost);
  real("sweep.relaxation", c.sweep.relaxation);
  real("sweep.tol", c.sweep.tol);
  count("sweep.max_iter", c.sweep.max_iter);

  if (auto it = kv.find("fit.data"); it != kv.end()) c.fit.data = it->second;
  opt_real("fit.population_scale", c.fit.population_scale);
  opt_real("fit.reference_population", c.fit.reference_population);
  real("fit.alpha_min", c.fit.alpha_min);
  real("fit.alpha_step", c.fit.alpha_step);
  real("fit.refine_tol", c.fit.refine_tol);
  count("fit.steps_per_month", c.fit.steps_per_month);
  if (auto it = kv.find("fit.initial"); it != kv.end()) {
    if (it->second == "equilibrium")
      c.fit.initial = FitInitial::Equilibrium;
    else if (it->second == "rescaled")
      c.fit.initial = FitInitial::Rescaled;
    else
      throw ConfigError("fit.initial", "must be 'equilibrium' or 'rescaled'");
  }
  real("fit.synthetic_alpha", c.fit.synthetic_alpha);
  count("fit.synthetic_months", c.fit.synthetic_months);
  real("fit.synthetic_noise", c.fit.synthetic_noise);
  opt_real("costeff.population_scale", c.costeff_population_scale);
  if (auto it = kv.find("sensitivity.kappa1"); it != kv.end()) c.sensitivity_kappa1 = parse_list("sensitivity.kappa1", it->second);
  if (auto it = kv.find("sensitivity.kappa2"); it != kv.end()) c.sensitivity_kappa2 = parse_list("sensitivity.kappa2", it->second);
  if (auto it = kv.find("output.dir"); it != kv.end()) c.output_dir = it->second;

  for (const auto& k : known_keys())
    if (!kv.count(k)) c.defaulted.insert(k);

  validate(c);
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

/// Writes every setting; parse_config_text(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
  using config_detail::fmt;
  std::ostringstream o;
  const bool seirs = c.model == ModelKind::SEIRS;
  o << "model = " << to_string(c.model) << '\n';
  o << "params.mu = " << fmt(c.params.mu) << '\n';
  o << "params.nu = " << fmt(c.params.nu) << '\n';
  o << "params.gamma = " << fmt(c.params.gamma) << '\n';
  if (seirs) o << "params.epsilon = " << fmt(c.params.epsilon) << '\n';
  o << "params.b0 = " << fmt(c.params.b0) << '\n';
  o << "params.b1 = " << fmt(c.params.b1) << '\n';
  if (seirs) o << "params.c1 = " << fmt(c.params.c1) << '\n';
  o << "params.phi = " << fmt(c.params.phi) << '\n';
  o << "params.alpha = " << fmt(c.params.alpha) << '\n';
  if (c.initial_mode == InitialMode::Explicit) {
    o << "initial.mode = explicit\n";
    const char* names_seirs[] = {"S", "E", "I", "R"};
    const char* names_sirs[] = {"S", "I", "R"};
    for (std::size_t i = 0; i < c.initial_state.size(); ++i)
      o << "initial." << (seirs ? names_seirs[i] : names_sirs[i]) << " = " << fmt(c.initial_state[i]) << '\n';
  } else {
    o << "initial.mode = equilibrium\n";
  }
  o << "grid.t0 = " << fmt(c.t0) << '\n';
  o << "grid.tf = " << fmt(c.tf) << '\n';
  o << "grid.n_steps = " << c.n_steps << '\n';
  o << "control.kappa1 = " << fmt(c.weights.kappa1) << '\n';
  o << "control.kappa2 = " << fmt(c.weights.kappa2) << '\n';
  o << "control.t_max = " << fmt(c.weights.t_max) << '\n';
  o << "control.unit_cost = " << fmt(c.weights.unit_cost) << '\n';
  o << "sweep.relaxation = " << fmt(c.sweep.relaxation) << '\n';
  o << "sweep.tol = " << fmt(c.sweep.tol) << '\n';
  o << "sweep.max_iter = " << c.sweep.max_iter << '\n';
  if (!c.fit.data.empty()) o << "fit.data = " << c.fit.data << '\n';
  if (c.fit.population_scale) o << "fit.population_scale = " << fmt(*c.fit.population_scale) << '\n';
  if (c.fit.reference_population) o << "fit.reference_population = " << fmt(*c.fit.reference_population) << '\n';
  o << "fit.alpha_min = " << fmt(c.fit.alpha_min) << '\n';
  o << "fit.alpha_step = " << fmt(c.fit.alpha_step) << '\n';
  o << "fit.refine_tol = " << fmt(c.fit.refine_tol) << '\n';
  o << "fit.steps_per_month = " << c.fit.steps_per_month << '\n';
  o << "fit.initial = " << (c.fit.initial == FitInitial::Rescaled ? "rescaled" : "equilibrium") << '\n';
  o << "fit.synthetic_alpha = " << fmt(c.fit.synthetic_alpha) << '\n';
  o << "fit.synthetic_months = " << c.fit.synthetic_months << '\n';
  o << "fit.synthetic_noise = " << fmt(c.fit.synthetic_noise) << '\n';
  if (c.costeff_population_scale) o << "costeff.population_scale = " << fmt(*c.costeff_population_scale) << '\n';
  auto list = [&](const char* key, const std::vector<double>& v) {
    o << key << " = ";
    for (std::size_t i = 0; i < v.size(); ++i) o << (i ? "," : "") << fmt(v[i]);
    o << '\n';
  };
  list("sensitivity.kappa1", c.sensitivity_kappa1);
  list("sensitivity.kappa2", c.sensitivity_kappa2);
  o << "output.dir = " << c.output_dir << '\n';
  return o.str();
}

}  // namespace fracepi
