#pragma once

// Seasonally forced SIRS and SEIRS models with Caputo time derivatives.
// Compartments are population proportions.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fracepi/error.hpp"
#include "fracepi/frackernel.hpp"

namespace fracepi {

enum class ModelKind { SIRS, SEIRS };

constexpr std::size_t dimension(ModelKind m) noexcept { return m == ModelKind::SIRS ? 3 : 4; }

inline std::string_view to_string(ModelKind m) noexcept { return m == ModelKind::SIRS ? "SIRS" : "SEIRS"; }

/// Rates are per year; phi in radians.
struct ModelParams {
  double mu = 0.0;
  double nu = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double c1 = 0.0;
  double phi = 0.0;
  double alpha = 1.0;

  /// Throws DomainError naming the first offending field.
  void validate() const {
    auto rate = [](double v, const char* name) {
      if (!std::isfinite(v) || v < 0.0) throw DomainError(std::string(name) + " must be a finite rate >= 0");
    };
    rate(mu, "mu");
    rate(nu, "nu");
    rate(gamma, "gamma");
    rate(epsilon, "epsilon");
    rate(b0, "b0");
    if (!(b1 >= 0.0 && b1 < 1.0)) throw DomainError("b1 must lie in [0, 1)");
    if (!(c1 >= 0.0 && c1 < 1.0)) throw DomainError("c1 must lie in [0, 1)");
    if (!std::isfinite(phi)) throw DomainError("phi must be finite");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  }

  FractionalOrder order() const { return FractionalOrder(alpha); }

  /// Mean system: seasonal amplitudes removed.
  ModelParams unforced() const {
    ModelParams p = *this;
    p.b1 = 0.0;
    p.c1 = 0.0;
    return p;
  }

  // HRSV parameter sets (seasonal phase 7*pi/5, integer order).
  static ModelParams sirs_hrsv() {
    ModelParams p;
    p.mu = 0.0113;
    p.nu = 36.0;
    p.gamma = 1.8;
    p.b0 = 74.2;
    p.b1 = 0.14;
    p.phi = 7.0 * std::numbers::pi / 5.0;
    return p;
  }
  static ModelParams seirs_hrsv() {
    ModelParams p;
    p.mu = 0.0113;
    p.nu = 36.0;
    p.gamma = 1.8;
    p.epsilon = 91.0;
    p.b0 = 88.25;
    p.b1 = 0.17;
    p.c1 = 0.17;
    p.phi = 7.0 * std::numbers::pi / 5.0;
    return p;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct SirsState {
  double S = 0.0;
  double I = 0.0;
  double R = 0.0;

  std::array<double, 3> to_array() const { return {S, I, R}; }
  static SirsState from(std::span<const double> y) { return {y[0], y[1], y[2]}; }
};

struct SeirsState {
  double S = 0.0;
  double E = 0.0;
  double I = 0.0;
  double R = 0.0;

  std::array<double, 4> to_array() const { return {S, E, I, R}; }
  static SeirsState from(std::span<const double> y) { return {y[0], y[1], y[2], y[3]}; }
  double total() const { return S + E + I + R; }
};

/// Transmission rate b0 (1 + b1 cos(2 pi t + phi)).
inline double beta_forcing(double t, const ModelParams& p) {
  return p.b0 * (1.0 + p.b1 * std::cos(2.0 * std::numbers::pi * t + p.phi));
}

/// Recruitment rate mu (1 + c1 cos(2 pi t + phi)).
inline double lambda_forcing(double t, const ModelParams& p) {
  return p.mu * (1.0 + p.c1 * std::cos(2.0 * std::numbers::pi * t + p.phi));
}

inline std::array<double, 3> sirs_rhs(double t, const SirsState& y, const ModelParams& p) {
  const double beta = beta_forcing(t, p);
  const double infection = beta * y.S * y.I;
  return {
      p.mu - p.mu * y.S - infection + p.gamma * y.R,
      infection - p.nu * y.I - p.mu * y.I,
      p.nu * y.I - p.mu * y.R - p.gamma * y.R,
  };
}

/// Controlled SEIRS: treatment T moves T*I per unit time from I to R.
inline std::array<double, 4> seirs_controlled_rhs(double t, const SeirsState& y, double treatment,
                                                  const ModelParams& p) {
  const double beta = beta_forcing(t, p);
  const double infection = beta * y.S * y.I;
  const double treated = treatment * y.I;
  return {
      lambda_forcing(t, p) - p.mu * y.S - infection + p.gamma * y.R,
      infection - p.mu * y.E - p.epsilon * y.E,
      p.epsilon * y.E - p.mu * y.I - p.nu * y.I - treated,
      p.nu * y.I - p.mu * y.R - p.gamma * y.R + treated,
  };
}

inline std::array<double, 4> seirs_rhs(double t, const SeirsState& y, const ModelParams& p) {
  return seirs_controlled_rhs(t, y, 0.0, p);
}

/// R0 of the mean SEIRS system.
inline double basic_reproduction_number(const ModelParams& p) {
  return p.epsilon * p.b0 / ((p.mu + p.epsilon) * (p.mu + p.nu));
}

inline SeirsState disease_free_state() { return {1.0, 0.0, 0.0, 0.0}; }

/// Positive fixed point of the mean SEIRS system (beta = b0, lambda = mu).
/// Throws NoEndemicEquilibrium when R0 <= 1.
inline SeirsState endemic_equilibrium(const ModelParams& p) {
  const double r0 = basic_reproduction_number(p);
  if (!(r0 > 1.0)) throw NoEndemicEquilibrium(r0);
  // Without turnover every point on a line is stationary.
  if (!(p.mu > 0.0)) throw DomainError("endemic equilibrium needs mu > 0");
  SeirsState eq;
  eq.S = (p.mu + p.epsilon) * (p.mu + p.nu) / (p.epsilon * p.b0);
  // S-balance with R = nu I / (mu + gamma) substituted.
  eq.I = p.mu * (1.0 - eq.S) / (p.b0 * eq.S - p.gamma * p.nu / (p.mu + p.gamma));
  eq.E = (p.mu + p.nu) * eq.I / p.epsilon;
  eq.R = p.nu * eq.I / (p.mu + p.gamma);
  return eq;
}

/// Integrates the chosen model at order params.alpha from y0.
inline Trajectory simulate(ModelKind model, const ModelParams& params, std::span<const double> y0,
                           const Grid& grid) {
  params.validate();
  if (y0.size() != dimension(model))
    throw DomainError("initial state has " + std::to_string(y0.size()) + " components, " +
                      std::string(to_string(model)) + " needs " + std::to_string(dimension(model)));
  for (double v : y0)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("initial state components must be finite and >= 0");

  if (model == ModelKind::SIRS) {
    auto f = [&params](double t, std::span<const double> y, std::span<double> dy) {
      const auto r = sirs_rhs(t, SirsState::from(y), params);
      std::copy(r.begin(), r.end(), dy.begin());
    };
    return caputo_pece_solve(f, y0, grid, params.order());
  }
  auto f = [&params](double t, std::span<const double> y, std::span<double> dy) {
    const auto r = seirs_rhs(t, SeirsState::from(y), params);
    std::copy(r.begin(), r.end(), dy.begin());
  };
  return caputo_pece_solve(f, y0, grid, params.order());
}

}  // namespace fracepi
