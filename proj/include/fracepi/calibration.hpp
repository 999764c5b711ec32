#pragma once

// Fitting the fractional order to monthly case counts.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fracepi/epimodels.hpp"
#include "fracepi/error.hpp"
#include "fracepi/frackernel.hpp"

namespace fracepi {

/// Monthly case counts; population_scale converts a model proportion into an
/// expected monthly count.
struct CaseSeries {
  std::string start_label;
  std::vector<double> counts;
  double population_scale = 1.0;

  std::size_t months() const noexcept { return counts.size(); }

  void validate() const {
    if (counts.size() < 2) throw TooFewRows(counts.size());
    for (double c : counts)
      if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("case counts must be finite and >= 0");
    if (!(population_scale > 0.0) || !std::isfinite(population_scale))
      throw DomainError("population_scale must be positive");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// "YYYY-MM" -> months since year 0, or nullopt.
inline std::optional<int> parse_month(std::string_view s) {
  s = trim(s);
  if (s.size() != 7 || s[4] != '-') return std::nullopt;
  int year = 0, month = 0;
  auto r1 = std::from_chars(s.data(), s.data() + 4, year);
  auto r2 = std::from_chars(s.data() + 5, s.data() + 7, month);
  if (r1.ec != std::errc() || r1.ptr != s.data() + 4 || r2.ec != std::errc() || r2.ptr != s.data() + 7)
    return std::nullopt;
  if (month < 1 || month > 12) return std::nullopt;
  return year * 12 + (month - 1);
}

inline std::string format_month(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", index / 12, index % 12 + 1);
  return buf;
}

}  // namespace detail

/// Reads a `month,cases` CSV. Rows must be consecutive months.
inline CaseSeries load_case_series(const std::string& path, double population_scale) {
  if (!(population_scale > 0.0) || !std::isfinite(population_scale))
    throw DomainError("population_scale must be positive");
  std::ifstream in(path);
  if (!in) throw MissingFile(path);

  CaseSeries series;
  series.population_scale = population_scale;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::optional<int> prev_month;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = detail::trim(line);
    if (line_no == 1 && row.size() >= 3 && row.substr(0, 3) == "\xEF\xBB\xBF") row.remove_prefix(3);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "month,cases") throw MalformedRow(line_no, "expected header 'month,cases'");
      header_seen = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
      throw MalformedRow(line_no, "expected two fields");
    const auto month = detail::parse_month(row.substr(0, comma));
    if (!month) throw MalformedRow(line_no, "month must be YYYY-MM");
    if (prev_month && *month != *prev_month + 1)
      throw MalformedRow(line_no, "months must be consecutive and chronological");
    const auto cases = detail::parse_double(row.substr(comma + 1));
    if (!cases) throw MalformedRow(line_no, "cases is not a number");
    if (*cases < 0.0) throw NegativeCount(line_no);
    if (!prev_month) series.start_label = detail::format_month(*month);
    prev_month = month;
    series.counts.push_back(*cases);
  }
  if (series.counts.size() < 2) throw TooFewRows(series.counts.size());
  return series;
}

inline void write_case_series(std::ostream& out, const CaseSeries& series) {
  auto start = detail::parse_month(series.start_label);
  if (!start) throw DomainError("start_label must be YYYY-MM");
  out << "month,cases\n";
  char buf[64];
  for (std::size_t k = 0; k < series.counts.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", series.counts[k]);
    out << detail::format_month(*start + static_cast<int>(k)) << ',' << buf << '\n';
  }
}

/// Grid on [0, months/12] with `steps_per_month` nodes per month, so every
/// month boundary is an exact node.
inline Grid monthly_grid(std::size_t months, std::size_t steps_per_month) {
  if (months < 1 || steps_per_month < 1) throw DomainError("monthly grid needs months and steps_per_month >= 1");
  return Grid::with_step(0.0, 1.0 / (12.0 * static_cast<double>(steps_per_month)), months * steps_per_month);
}

/// population_scale * component at t = k/12 for k = 0..months-1.
inline std::vector<double> sample_monthly(const Trajectory& traj, std::size_t component, std::size_t months,
                                          double population_scale) {
  const Grid& g = traj.grid();
  if (component >= traj.dim()) throw DomainError("component index out of range");
  const double per_month = 1.0 / (12.0 * g.step());
  const double steps = std::round(per_month);
  if (g.t0() != 0.0 || steps < 1.0 || std::abs(per_month - steps) > 1e-9 * steps)
    throw DomainError("grid misaligned: month boundaries are not grid nodes");
  const auto stride = static_cast<std::size_t>(steps);
  if (months == 0 || (months - 1) * stride > g.n_steps())
    throw DomainError("requested " + std::to_string(months) + " months exceed the grid span");
  std::vector<double> out(months);
  for (std::size_t k = 0; k < months; ++k) out[k] = population_scale * traj(k * stride, component);
  return out;
}

inline double l2_error(std::span<const double> model_samples, const CaseSeries& series) {
  if (model_samples.size() != series.counts.size())
    throw ShapeMismatch("l2_error: " + std::to_string(model_samples.size()) + " samples vs " +
                        std::to_string(series.counts.size()) + " observations");
  double ss = 0.0;
  for (std::size_t k = 0; k < model_samples.size(); ++k) {
    const double r = model_samples[k] - series.counts[k];
    ss += r * r;
  }
  return std::sqrt(ss);
}

/// 100 * error / (years * reference), in percent. The reference population
/// defaults to the series' population_scale.
inline double relative_error(double error, const CaseSeries& series, double years,
                             std::optional<double> reference_population = std::nullopt) {
  const double denom = years * reference_population.value_or(series.population_scale);
  if (!(denom > 0.0) || !std::isfinite(denom)) throw UndefinedRatio("relative_error: denominator must be positive");
  return 100.0 * error / denom;
}

inline std::size_t infectious_index(ModelKind model) noexcept { return model == ModelKind::SIRS ? 1 : 2; }

/// Mean-system endemic state of either model, optionally with I replaced by
/// the first observation (S absorbs the difference so the total stays 1).
inline std::vector<double> fitting_initial_state(ModelKind model, const ModelParams& params,
                                                 const CaseSeries* match_first_month = nullptr) {
  std::vector<double> y0;
  if (model == ModelKind::SEIRS) {
    const auto eq = endemic_equilibrium(params);
    y0 = {eq.S, eq.E, eq.I, eq.R};
  } else {
    const double r0 = params.b0 / (params.mu + params.nu);
    if (!(r0 > 1.0)) throw NoEndemicEquilibrium(r0);
    if (!(params.mu > 0.0)) throw DomainError("endemic equilibrium needs mu > 0");
    const double s = 1.0 / r0;
    const double i = params.mu * (1.0 - s) / (params.b0 * s - params.gamma * params.nu / (params.mu + params.gamma));
    y0 = {s, i, params.nu * i / (params.mu + params.gamma)};
  }
  if (match_first_month) {
    const std::size_t ii = infectious_index(model);
    const double target = match_first_month->counts.front() / match_first_month->population_scale;
    y0[0] += y0[ii] - target;
    y0[ii] = target;
    if (y0[0] < 0.0) throw DomainError("first observation exceeds the susceptible pool");
  }
  return y0;
}

struct AlphaSearch {
  double alpha_min = 0.5;
  double alpha_step = 0.005;
  double refine_tol = 5e-4;
  std::size_t steps_per_month = 17;
  /// Denominator for the relative error; population_scale when empty.
  std::optional<double> reference_population;
};

struct AlphaProbe {
  double alpha = 0.0;
  double error = 0.0;
  bool feasible = true;
};

struct FitResult {
  double best_alpha = 1.0;
  double error = 0.0;
  double relative_error = 0.0;
  std::vector<AlphaProbe> evaluations;
};

/// Descending scan from alpha = 1 until the error rises on two consecutive
/// probes, then golden-section refinement around the best probe.
inline FitResult fit_alpha(ModelKind model, const ModelParams& params, std::span<const double> y0,
                           const CaseSeries& series, const AlphaSearch& search = {}) {
  series.validate();
  if (!(search.alpha_min > 0.0 && search.alpha_min <= 1.0)) throw DomainError("alpha_min must lie in (0, 1]");
  if (!(search.alpha_step > 0.0)) throw DomainError("alpha_step must be positive");
  if (!(search.refine_tol > 0.0)) throw DomainError("refine_tol must be positive");

  const std::size_t months = series.months();
  const Grid grid = monthly_grid(months, search.steps_per_month);
  const std::size_t component = infectious_index(model);
  FitResult result;

  auto probe = [&](double alpha) {
    AlphaProbe p{alpha, std::numeric_limits<double>::infinity(), false};
    try {
      ModelParams q = params;
      q.alpha = alpha;
      const auto traj = simulate(model, q, y0, grid);
      const auto samples = sample_monthly(traj, component, months, series.population_scale);
      p.error = l2_error(samples, series);
      p.feasible = std::isfinite(p.error);
    } catch (const DivergenceError&) {
      p.feasible = false;
    }
    result.evaluations.push_back(p);
    return p.feasible ? p.error : std::numeric_limits<double>::infinity();
  };

  // Scan.
  double prev_err = std::numeric_limits<double>::quiet_NaN();
  int rises = 0;
  for (std::size_t k = 0;; ++k) {
    const double alpha = 1.0 - static_cast<double>(k) * search.alpha_step;
    if (alpha < search.alpha_min - 1e-12) break;
    const double err = probe(alpha);
    if (std::isfinite(err)) {
      if (std::isfinite(prev_err) && err > prev_err)
        ++rises;
      else
        rises = 0;
      prev_err = err;
      if (rises >= 2) break;
    }
  }

  auto best_index = [&]() {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < result.evaluations.size(); ++i) {
      const auto& e = result.evaluations[i];
      if (!e.feasible) continue;
      if (!best) {
        best = i;
        continue;
      }
      const auto& b = result.evaluations[*best];
      if (e.error < b.error || (e.error == b.error && e.alpha > b.alpha)) best = i;
    }
    return best;
  };

  auto scan_best = best_index();
  if (!scan_best) throw FitFailure("every probed alpha diverged");

  // Golden-section refinement inside the bracketing interval.
  const double centre = result.evaluations[*scan_best].alpha;
  double lo = std::max(search.alpha_min, centre - search.alpha_step);
  double hi = std::min(1.0, centre + search.alpha_step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  if (hi - lo > search.refine_tol) {
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = probe(x1);
    double f2 = probe(x2);
    while (hi - lo > search.refine_tol) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = probe(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = probe(x2);
      }
    }
  }

  const auto& best = result.evaluations[*best_index()];
  result.best_alpha = best.alpha;
  result.error = best.error;
  result.relative_error =
      relative_error(best.error, series, static_cast<double>(months) / 12.0, search.reference_population);
  return result;
}

/// Model-generated monthly counts plus uniform noise in [-noise, +noise],
/// clamped at zero. Deterministic for a given seed.
inline CaseSeries synth_series(ModelKind model, const ModelParams& params, std::span<const double> y0,
                               std::size_t months, double population_scale, double noise_amplitude,
                               std::uint64_t seed, std::size_t steps_per_month = 17,
                               std::string start_label = "2011-09") {
  if (!(noise_amplitude >= 0.0)) throw DomainError("noise amplitude must be >= 0");
  if (!(population_scale > 0.0)) throw DomainError("population_scale must be positive");
  const auto traj = simulate(model, params, y0, monthly_grid(months, steps_per_month));
  CaseSeries s;
  s.start_label = std::move(start_label);
  s.population_scale = population_scale;
  s.counts = sample_monthly(traj, infectious_index(model), months, population_scale);
  if (noise_amplitude > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-noise_amplitude, noise_amplitude);
    for (double& c : s.counts) c = std::max(0.0, c + unif(rng));
  }
  return s;
}

}  // namespace fracepi
