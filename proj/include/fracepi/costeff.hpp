#pragma once

// Cost-effectiveness summaries for treatment strategies: efficacy, cases
// averted (A), effectiveness (Fbar), total cost (TC), ACER and ICER.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "fracepi/error.hpp"
#include "fracepi/focp.hpp"
#include "fracepi/frackernel.hpp"
#include "fracepi/quadrature.hpp"

namespace fracepi {

namespace detail {
inline void require_positive_i0(double I0) {
  if (!(I0 > 0.0) || !std::isfinite(I0)) throw DomainError("I0 must be positive");
}
inline std::size_t infectious_column(const Trajectory& state) {
  if (state.dim() != 4) throw ShapeMismatch("expected an S,E,I,R state trajectory");
  return 2;
}
}  // namespace detail

/// F(t) = 1 - I(t)/I0 at every node.
inline std::vector<double> efficacy_series(const Trajectory& state, double I0) {
  detail::require_positive_i0(I0);
  const std::size_t ic = detail::infectious_column(state);
  std::vector<double> F(state.size());
  for (std::size_t k = 0; k < state.size(); ++k) F[k] = 1.0 - state(k, ic) / I0;
  return F;
}

/// A = (tf - t0) I0 - integral of I. Negative when the strategy does worse
/// than holding I at I0.
inline double averted(const Trajectory& state, double I0) {
  detail::require_positive_i0(I0);
  const Grid& g = state.grid();
  const auto I = state.column(detail::infectious_column(state));
  return (g.tf() - g.t0()) * I0 - trapezoid(I, g.step());
}

inline double effectiveness(double A, double I0, double tf) {
  const double denom = tf * I0;
  if (!(denom > 0.0) || !std::isfinite(denom)) throw UndefinedRatio("effectiveness: tf * I0 must be positive");
  return A / denom;
}

/// Integral of C T(t) I(t).
inline double total_cost(const ControlTrajectory& control, const Trajectory& state, double C) {
  detail::require_same_grid(state.grid(), control.grid, "total_cost");
  if (control.values.size() != state.size()) throw ShapeMismatch("total_cost: control length differs from grid");
  const std::size_t ic = detail::infectious_column(state);
  std::vector<double> integrand(state.size());
  for (std::size_t k = 0; k < state.size(); ++k) integrand[k] = C * control.values[k] * state(k, ic);
  return trapezoid(integrand, state.grid().step());
}

inline double acer(double TC, double A) {
  if (A == 0.0) throw UndefinedRatio("ACER undefined: no cases averted");
  return TC / A;
}

struct Strategy {
  std::string label;
  Trajectory state;
  ControlTrajectory control;
  double I0 = 0.0;
  double C = 1.0;
};

struct StrategySummary {
  std::string label;
  double A = 0.0;
  double TC = 0.0;
  double ACER = 0.0;
  double Fbar = 0.0;
};

inline StrategySummary summarize(const Strategy& s) {
  StrategySummary out;
  out.label = s.label;
  out.A = averted(s.state, s.I0);
  out.TC = total_cost(s.control, s.state, s.C);
  out.ACER = acer(out.TC, out.A);
  const Grid& g = s.state.grid();
  out.Fbar = effectiveness(out.A, s.I0, g.tf() - g.t0());
  return out;
}

struct CostEffRow {
  std::string label;
  double A = 0.0;
  double TC = 0.0;
  double ACER = 0.0;
  double Fbar = 0.0;
  double ICER = 0.0;
  /// Empty, or a dominance remark ("dominant" when the strategy is both more
  /// effective and cheaper than its comparator; "harmful" when A < 0).
  std::string note;
};

struct CostEffReport {
  std::vector<CostEffRow> rows;  // increasing A
};

/// Ranks by increasing A; the least effective strategy's ICER is its ACER,
/// every other strategy is compared with the row just before it.
inline CostEffReport icer_rank(std::vector<StrategySummary> strategies) {
  if (strategies.size() < 2) throw RankingError("ICER ranking needs at least two strategies");
  std::stable_sort(strategies.begin(), strategies.end(),
                   [](const StrategySummary& a, const StrategySummary& b) { return a.A < b.A; });
  for (std::size_t i = 1; i < strategies.size(); ++i)
    if (strategies[i].A == strategies[i - 1].A)
      throw RankingError("strategies '" + strategies[i - 1].label + "' and '" + strategies[i].label +
                         "' avert the same number of cases");

  CostEffReport report;
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    const auto& s = strategies[i];
    CostEffRow row{s.label, s.A, s.TC, s.ACER, s.Fbar, s.ACER, {}};
    if (i > 0) {
      const auto& prev = strategies[i - 1];
      row.ICER = (s.TC - prev.TC) / (s.A - prev.A);
      if (s.TC <= prev.TC) row.note = "dominant";
    }
    if (s.A < 0.0) row.note = row.note.empty() ? "harmful" : row.note + ";harmful";
    report.rows.push_back(std::move(row));
  }
  return report;
}

inline void write_report_csv(std::ostream& out, const CostEffReport& report) {
  out << "label,A,TC,ACER,Fbar,ICER\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", r.A, r.TC, r.ACER, r.Fbar, r.ICER);
    out << r.label << ',' << buf << '\n';
  }
}

}  // namespace fracepi
