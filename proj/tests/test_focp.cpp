#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "fracepi/focp.hpp"
#include "support/oracles.hpp"

using namespace fracepi;
using Catch::Approx;

namespace {

ModelParams control_params(double alpha) {
  auto p = ModelParams::seirs_hrsv();
  p.phi = std::numbers::pi / 2.0;
  p.alpha = alpha;
  return p;
}

}  // namespace

TEST_CASE("objective quadrature", "[focp][objective]") {
  const Grid g(0.0, 5.0, 100);
  Trajectory state(g, 4);
  auto control = ControlTrajectory::zeros(g);
  ControlWeights w;
  CHECK(objective(state, control, w) == 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) state(k, 2) = 0.03;
  CHECK(objective(state, control, w) == Approx(w.kappa1 * 0.03 * 5.0).epsilon(1e-14));
  for (auto& T : control.values) T = 0.5;
  CHECK(objective(state, control, w) == Approx(5.0 * (0.03 + w.kappa2 * 0.25)).epsilon(1e-14));

  const auto other = ControlTrajectory::zeros(Grid(0.0, 5.0, 50));
  CHECK_THROWS_AS(objective(state, other, w), ShapeMismatch);
}

TEST_CASE("projected control", "[focp][projection]") {
  ControlWeights w;  // kappa2 = 0.001, t_max = 1
  CHECK(projected_control(0.01, 0.02, 0.1, w) == 0.0);
  CHECK(projected_control(0.05, 0.01, 0.0, w) == 0.0);
  CHECK(projected_control(0.03, 0.01, 0.1, w) == Approx(1.0));     // 0.02 * 0.1 / 0.002 = 1
  CHECK(projected_control(0.05, 0.01, 0.1, w) == 1.0);     // 2 -> clamped
  CHECK(projected_control(0.007, 0.001, 0.1, w) == Approx(0.3).epsilon(1e-12));
}

TEST_CASE("reversed adjoint right-hand side", "[focp][adjoint]") {
  const auto p = control_params(0.993);
  const SeirsState y{0.4, 0.01, 0.03, 0.56};
  const std::array<double, 4> zero{};
  ControlWeights w;
  w.kappa1 = 0.0;
  for (double v : adjoint_reversed_rhs(0.7, 5.0, zero, y, 0.4, p, w)) CHECK(v == 0.0);
  w.kappa1 = 1.0;
  const auto src = adjoint_reversed_rhs(0.7, 5.0, zero, y, 0.4, p, w);
  CHECK(src[0] == 0.0);
  CHECK(src[1] == 0.0);
  CHECK(src[2] == 1.0);
  CHECK(src[3] == 0.0);

  // Generic inputs: the reversed field is +dH/dx at original time tf - t_rev.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::array<double, 4> pc{u(rng), u(rng), u(rng), u(rng)};
    const SeirsState x{0.5 + 0.4 * u(rng), 0.02 + 0.01 * u(rng), 0.03 + 0.02 * u(rng), 0.4 + 0.1 * u(rng)};
    const double T = 0.5 + 0.5 * u(rng);
    const double t_rev = 2.5 + 2.5 * u(rng);
    ControlWeights wk{1.0 + u(rng), 0.001, 1.0, 1.0};
    const auto got = adjoint_reversed_rhs(t_rev, 5.0, pc, x, T, p, wk);
    const auto ref = oracle::minus_dH_dx(5.0 - t_rev, pc, x.to_array(), T, p, wk);
    for (std::size_t i = 0; i < 4; ++i) CHECK(got[i] == Approx(-ref[i]).margin(1e-12));
  }
}

TEST_CASE("solve_adjoint", "[focp][adjoint]") {
  SECTION("zero running cost and zero control give zero co-states") {
    const auto p = control_params(0.9);
    const Grid g(0.0, 2.0, 200);
    const auto control = ControlTrajectory::zeros(g);
    const auto state = solve_controlled_state(p, endemic_equilibrium(p), control);
    ControlWeights w;
    w.kappa1 = 0.0;
    const auto adj = solve_adjoint(state, control, p, w);
    for (double v : adj.values()) CHECK(v == 0.0);
  }
  SECTION("alpha = 1 matches a classical backward RK4 integration") {
    const auto p = control_params(1.0);
    const std::size_t n = 5000;
    const Grid g(0.0, 5.0, n);
    ControlTrajectory control{g, std::vector<double>(n + 1)};
    for (std::size_t k = 0; k <= n; ++k) control.values[k] = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * g.time(k));
    const ControlWeights w;
    const auto state = solve_controlled_state(p, endemic_equilibrium(p), control);
    const auto adj = solve_adjoint(state, control, p, w);

    std::vector<oracle::State4> x(n + 1);
    for (std::size_t k = 0; k <= n; ++k) x[k] = {state(k, 0), state(k, 1), state(k, 2), state(k, 3)};
    const auto ref = oracle::classical_adjoint(x, control.values, 0.0, g.step(), p, w);
    double sup = 0.0;
    for (std::size_t k = 0; k <= n; ++k)
      for (std::size_t c = 0; c < 4; ++c) sup = std::max(sup, std::abs(adj(k, c) - ref[k][c]));
    CHECK(sup <= 1e-3);
    for (std::size_t c = 0; c < 4; ++c) CHECK(adj(n, c) == 0.0);
  }
}

TEST_CASE("solve_focp: no running cost means no treatment", "[focp][sweep]") {
  const auto p = control_params(0.993);
  const auto y0 = endemic_equilibrium(p);
  ControlWeights w;
  w.kappa1 = 0.0;
  const Grid g(0.0, 5.0, 500);
  const auto sol = solve_focp(p, y0, w, g);
  CHECK(sol.converged);
  for (double T : sol.control.values) CHECK(T == 0.0);
  const auto free_run = simulate(ModelKind::SEIRS, p, y0.to_array(), g);
  CHECK(sol.state.values() == free_run.values());
}

TEST_CASE("solve_focp: default treatment problem", "[focp][sweep]") {
  const auto p = control_params(0.993);
  const auto y0 = endemic_equilibrium(p);
  const ControlWeights w;
  const Grid g(0.0, 5.0, 1000);
  const auto sol = solve_focp(p, y0, w, g);
  REQUIRE(sol.converged);
  CHECK(sol.iterations >= 1);
  CHECK(sol.final_residual() <= 1e-4);
  CHECK(sol.residual_history.size() == sol.iterations);

  for (double T : sol.control.values) {
    CHECK(T >= 0.0);
    CHECK(T <= w.t_max);
  }
  for (std::size_t c = 0; c < 4; ++c) CHECK(sol.adjoint(g.n_steps(), c) == 0.0);

  // Fixed point: re-projecting the returned state/co-states reproduces the control.
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double proj = projected_control(sol.adjoint(k, 2), sol.adjoint(k, 3), sol.state(k, 2), w);
    CHECK(std::abs(proj - sol.control.values[k]) <= 1e-4);
  }

  // Treatment comes in annual bursts: one control maximum per year in years 1-4.
  int bursts = 0;
  for (std::size_t k = 200; k < 800; ++k)
    if (sol.control.values[k] > sol.control.values[k - 1] && sol.control.values[k] >= sol.control.values[k + 1]) ++bursts;
  CHECK(bursts == 3);

  const auto again = solve_focp(p, y0, w, g);
  CHECK(again.objective == sol.objective);
  CHECK(again.control.values == sol.control.values);
  CHECK(again.state.values() == sol.state.values());
  CHECK(again.adjoint.values() == sol.adjoint.values());
  CHECK(std::isfinite(sol.objective));
  CHECK(sol.objective == objective(sol.state, sol.control, w));
}

TEST_CASE("solve_focp: alpha = 1 agrees with a classical sweep", "[focp][sweep][classical]") {
  const auto p = control_params(1.0);
  const auto y0 = endemic_equilibrium(p);
  const ControlWeights w;
  const std::size_t n = 2000;
  const Grid g(0.0, 5.0, n);
  SweepSettings s;
  s.tol = 1e-6;
  const auto sol = solve_focp(p, y0, w, g, s);
  REQUIRE(sol.converged);
  const auto ref = oracle::classical_sweep(p, y0.to_array(), w, 0.0, g.step(), n, 0.5, 1e-6);
  double ds = 0.0, da = 0.0, dc = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    for (std::size_t c = 0; c < 4; ++c) {
      ds = std::max(ds, std::abs(sol.state(k, c) - ref.state[k][c]));
      da = std::max(da, std::abs(sol.adjoint(k, c) - ref.adjoint[k][c]));
    }
    dc = std::max(dc, std::abs(sol.control.values[k] - ref.control[k]));
  }
  INFO("state " << ds << " adjoint " << da << " control " << dc);
  CHECK(ds <= 5e-3);
  CHECK(da <= 5e-3);
  CHECK(dc <= 5e-3);
}

TEST_CASE("solve_focp: diagnostics and errors", "[focp][sweep][errors]") {
  const auto p = control_params(0.993);
  const auto y0 = endemic_equilibrium(p);
  const Grid g(0.0, 5.0, 400);
  SweepSettings once;
  once.max_iter = 1;
  const auto sol = solve_focp(p, y0, ControlWeights{}, g, once);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 1);
  for (double T : sol.control.values) CHECK(T == 0.0);

  SweepSettings bad;
  bad.relaxation = 0.0;
  CHECK_THROWS_AS(solve_focp(p, y0, ControlWeights{}, g, bad), DomainError);
  ControlWeights zero_k2;
  zero_k2.kappa2 = 0.0;
  CHECK_THROWS_AS(solve_focp(p, y0, zero_k2, g), DomainError);

  auto explosive = p;
  explosive.b0 = 1e300;
  try {
    solve_focp(explosive, SeirsState{0.5, 0.1, 0.1, 0.3}, ControlWeights{}, g);
    FAIL("expected SweepError");
  } catch (const SweepError& e) {
    CHECK(e.iteration() == 1);
  }
}
