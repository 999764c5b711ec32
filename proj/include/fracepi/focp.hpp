#pragma once

// Fractional optimal treatment control for the SEIRS model, solved with
// Pontryagin's maximum principle and a relaxed forward-backward sweep.
//
// The adjoint system is a right Riemann-Liouville problem with zero terminal
// data. Substituting t' = tf - t turns it into a left problem with zero
// initial data, where the left RL and Caputo derivatives coincide, so the
// same PECE kernel integrates both passes.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fracepi/epimodels.hpp"
#include "fracepi/error.hpp"
#include "fracepi/frackernel.hpp"
#include "fracepi/quadrature.hpp"

namespace fracepi {

struct ControlWeights {
  double kappa1 = 1.0;
  double kappa2 = 0.001;
  double t_max = 1.0;
  /// Detection and treatment cost per person.
  double unit_cost = 1.0;

  void validate() const {
    if (!(kappa1 >= 0.0) || !std::isfinite(kappa1)) throw DomainError("kappa1 must be finite and >= 0");
    if (!(kappa2 > 0.0) || !std::isfinite(kappa2)) throw DomainError("kappa2 must be finite and > 0");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("t_max must be finite and > 0");
    if (!(unit_cost >= 0.0) || !std::isfinite(unit_cost)) throw DomainError("unit_cost must be finite and >= 0");
  }
};

/// Treatment rate at each grid node.
struct ControlTrajectory {
  Grid grid;
  std::vector<double> values;

  static ControlTrajectory zeros(const Grid& g) { return {g, std::vector<double>(g.size(), 0.0)}; }
};

struct SweepSettings {
  double relaxation = 0.5;
  double tol = 1e-4;
  std::size_t max_iter = 200;

  void validate() const {
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw DomainError("relaxation must lie in (0, 1]");
    if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("tol must be positive");
    if (max_iter < 1) throw DomainError("max_iter must be >= 1");
  }
};

struct FocpSolution {
  Trajectory state;    // S, E, I, R
  Trajectory adjoint;  // p1..p4, stored in original time
  ControlTrajectory control;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;

  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

namespace detail {
inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw ShapeMismatch(std::string(what) + ": grids differ");
}
}  // namespace detail

/// Trapezoidal value of the integral of kappa1 I + kappa2 T^2.
inline double objective(const Trajectory& state, const ControlTrajectory& control, const ControlWeights& w) {
  detail::require_same_grid(state.grid(), control.grid, "objective");
  if (control.values.size() != state.size()) throw ShapeMismatch("objective: control length differs from grid");
  std::vector<double> integrand(state.size());
  for (std::size_t k = 0; k < state.size(); ++k) {
    const double T = control.values[k];
    integrand[k] = w.kappa1 * state(k, 2) + w.kappa2 * T * T;
  }
  return trapezoid(integrand, state.grid().step());
}

/// Minimiser of the Hamiltonian over [0, t_max].
inline double projected_control(double p3, double p4, double I, const ControlWeights& w) {
  const double unconstrained = (p3 - p4) * I / (2.0 * w.kappa2);
  return std::min(std::max(0.0, unconstrained), w.t_max);
}

/// Right-hand side of the time-reversed co-state system at reversed time
/// t_rev. State, control and forcing are taken at original time tf - t_rev.
inline std::array<double, 4> adjoint_reversed_rhs(double t_rev, double tf, std::span<const double> p,
                                                  const SeirsState& y, double T, const ModelParams& params,
                                                  const ControlWeights& w) {
  const double beta = beta_forcing(tf - t_rev, params);
  const double mu = params.mu;
  return {
      -(p[0] * (mu + beta * y.I) - beta * y.I * p[1]),
      -(p[1] * (mu + params.epsilon) - params.epsilon * p[2]),
      -(-w.kappa1 + beta * p[0] * y.S - beta * p[1] * y.S + p[2] * (mu + params.nu + T) - p[3] * (params.nu + T)),
      -(-params.gamma * p[0] + p[3] * (mu + params.gamma)),
  };
}

/// Co-states for a given state/control pair; p(tf) = 0 exactly.
inline Trajectory solve_adjoint(const Trajectory& state, const ControlTrajectory& control,
                                const ModelParams& params, const ControlWeights& w) {
  detail::require_same_grid(state.grid(), control.grid, "solve_adjoint");
  if (state.dim() != 4) throw ShapeMismatch("solve_adjoint: state must have 4 components");
  const Grid& grid = state.grid();
  const std::size_t n = grid.n_steps();
  const double tf = grid.tf();
  const Grid reversed = Grid::with_step(0.0, grid.step(), n);

  auto rhs = [&](std::size_t node, double t_rev, std::span<const double> p, std::span<double> dp) {
    const std::size_t orig = n - node;
    const auto r = adjoint_reversed_rhs(t_rev, tf, p, SeirsState::from(state.row(orig)), control.values[orig],
                                        params, w);
    std::copy(r.begin(), r.end(), dp.begin());
  };
  const std::array<double, 4> zero{};
  const Trajectory rev = caputo_pece_solve(rhs, std::span<const double>(zero), reversed, params.order());

  Trajectory out(grid, 4);
  for (std::size_t k = 0; k <= n; ++k)
    std::copy(rev.row(n - k).begin(), rev.row(n - k).end(), out.row(k).begin());
  return out;
}

/// Controlled state trajectory for nodal treatment values.
inline Trajectory solve_controlled_state(const ModelParams& params, const SeirsState& y0,
                                         const ControlTrajectory& control) {
  auto rhs = [&](std::size_t node, double t, std::span<const double> y, std::span<double> dy) {
    const auto r = seirs_controlled_rhs(t, SeirsState::from(y), control.values[node], params);
    std::copy(r.begin(), r.end(), dy.begin());
  };
  const auto init = y0.to_array();
  return caputo_pece_solve(rhs, std::span<const double>(init), control.grid, params.order());
}

/// Forward-backward sweep from the initial guess T = 0.
///
/// Each iteration solves the state with the current control, the co-states
/// backwards, projects the Hamiltonian minimiser onto [0, t_max] and relaxes
/// towards it. The fixed-point residual is sup|T_proj - T|; the sweep stops
/// once it is at most tol * max(1, sup T). The returned state and co-states
/// are those generated by the returned control.
inline FocpSolution solve_focp(const ModelParams& params, const SeirsState& y0, const ControlWeights& w,
                               const Grid& grid, const SweepSettings& sweep = {}) {
  params.validate();
  w.validate();
  sweep.validate();
  for (double v : y0.to_array())
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("initial state components must be finite and >= 0");

  ControlTrajectory control = ControlTrajectory::zeros(grid);
  std::vector<double> projected(grid.size());
  std::vector<double> history;

  for (std::size_t iter = 1;; ++iter) {
    try {
      Trajectory state = solve_controlled_state(params, y0, control);
      Trajectory adjoint = solve_adjoint(state, control, params, w);

      double diff = 0.0;
      double peak = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        projected[k] = projected_control(adjoint(k, 2), adjoint(k, 3), state(k, 2), w);
        diff = std::max(diff, std::abs(projected[k] - control.values[k]));
        peak = std::max(peak, control.values[k]);
      }
      history.push_back(diff);
      const bool converged = diff <= sweep.tol * std::max(1.0, peak);
      if (converged || iter >= sweep.max_iter) {
        const double J = objective(state, control, w);
        return FocpSolution{std::move(state), std::move(adjoint), control, J, iter, std::move(history), converged};
      }
    } catch (const DivergenceError& e) {
      throw SweepError(iter, e.what());
    }
    const double r = sweep.relaxation;
    for (std::size_t k = 0; k < grid.size(); ++k)
      control.values[k] = std::clamp((1.0 - r) * control.values[k] + r * projected[k], 0.0, w.t_max);
  }
}

}  // namespace fracepi
