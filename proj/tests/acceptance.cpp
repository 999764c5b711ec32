// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fracepi/app.hpp"
#include "support/oracles.hpp"

using namespace fracepi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within_rel(double v, double target, double rel) { return std::abs(v - target) <= rel * std::abs(target); }

ModelParams control_params(double alpha) {
  auto p = ModelParams::seirs_hrsv();
  p.phi = std::numbers::pi / 2.0;
  p.alpha = alpha;
  return p;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fracepi_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome equilibrium_table() {
  const auto dir = scratch("ac1");
  AppOptions opts;
  opts.out_dir = dir.string();
  std::ostringstream out, err;
  const int code = run_cli("equilibrium", opts, out, err);
  const auto eq = endemic_equilibrium(ModelParams::seirs_hrsv());
  const double expect[4] = {0.4081, 0.0110, 0.0278, 0.5531};
  const double got[4] = {eq.S, eq.E, eq.I, eq.R};
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(got[i] - expect[i]));
  const bool printed = out.str() == "(0.4081, 0.0110, 0.0278, 0.5531)\n";
  return {code == 0 && printed && worst <= 5e-5,
          fmt("max deviation %.2e, cli exit %d, printed %s", worst, code, printed ? "ok" : "mismatch")};
}

Outcome classical_reduction() {
  auto p = ModelParams::seirs_hrsv();
  p.alpha = 1.0;
  const auto eq = endemic_equilibrium(p);
  // Start off equilibrium so the transient is exercised too.
  const std::array<double, 4> y0{eq.S + 0.05, eq.E, eq.I + 0.01, eq.R - 0.06};
  const std::size_t n = 5000;
  const auto traj = simulate(ModelKind::SEIRS, p, y0, Grid(0.0, 5.0, n));
  const auto ref = oracle::rk4<4>(
      [&p](double t, const std::array<double, 4>& y) { return seirs_rhs(t, SeirsState::from(y), p); }, y0, 0.0,
      1e-3, n);
  double sup = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    for (std::size_t c = 0; c < 4; ++c) sup = std::max(sup, std::abs(traj(k, c) - ref[k][c]));
  return {sup <= 1e-3, fmt("sup-norm %.3e at h = 1e-3", sup)};
}

Outcome analytic_solves() {
  bool pass = true;
  std::string detail = "t^0.7 errors";
  double prev = HUGE_VAL;
  const double a = 0.7;
  auto power = [a](double, std::span<const double>, std::span<double> dy) { dy[0] = std::tgamma(a + 1.0); };
  const std::array<double, 1> zero{0.0};
  for (std::size_t n : {250u, 500u, 1000u, 2000u}) {
    const auto traj = caputo_pece_solve(power, std::span<const double>(zero), Grid(0.0, 1.0, n), FractionalOrder(a));
    double err = 0.0;
    for (std::size_t k = 0; k <= n; ++k) err = std::max(err, std::abs(traj(k, 0) - std::pow(traj.grid().time(k), a)));
    if (!(err < prev)) pass = false;
    detail += fmt(" %.2e", err);
    prev = err;
  }
  detail += pass ? " (decreasing);" : " (not decreasing);";

  auto decay = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
  const std::array<double, 1> one{1.0};
  for (double alpha : {0.7, 0.9, 0.993}) {
    const auto traj = caputo_pece_solve(decay, std::span<const double>(one), Grid(0.0, 1.0, 2000), FractionalOrder(alpha));
    double err = 0.0;
    for (std::size_t k = 0; k <= 2000; ++k) {
      const double t = traj.grid().time(k);
      const auto exact = oracle::mittag_leffler_long(alpha, 1.0L, -std::pow(static_cast<long double>(t), alpha));
      err = std::max(err, std::abs(traj(k, 0) - static_cast<double>(exact)));
    }
    if (!(err <= 1e-3)) pass = false;
    detail += fmt(" ML(%.3g) %.2e", alpha, err);
  }
  return {pass, detail};
}

struct FocpRun {
  FocpSolution sol;
  StrategySummary summary;
  double fmin, fmax;
};

FocpRun run_default(double alpha) {
  const auto p = control_params(alpha);
  const auto y0 = endemic_equilibrium(p);
  FocpRun r{solve_focp(p, y0, ControlWeights{}, Grid(0.0, 5.0, 1000)), {}, 0.0, 0.0};
  r.summary = summarize(Strategy{app_detail::label_for_alpha(alpha), r.sol.state, r.sol.control, y0.I, 1.0});
  const auto F = efficacy_series(r.sol.state, y0.I);
  r.fmin = *std::min_element(F.begin(), F.end());
  r.fmax = *std::max_element(F.begin(), F.end());
  return r;
}

Outcome focp_targets(const FocpRun& r) {
  const auto& s = r.summary;
  const bool pass = r.sol.converged && within_rel(s.Fbar, 0.03547, 0.10) && within_rel(s.ACER, 18.8, 0.10) &&
                    std::abs(r.fmin + 1.14) <= 0.15 && std::abs(r.fmax - 0.62) <= 0.10;
  return {pass, fmt("Fbar %.5f, ACER %.3f, min F %.4f, max F %.4f, %zu sweeps%s", s.Fbar, s.ACER, r.fmin, r.fmax,
                    r.sol.iterations, r.sol.converged ? "" : " (unconverged)")};
}

Outcome icer_comparison(const FocpRun& classical, const FocpRun& fractional) {
  const auto report = icer_rank({classical.summary, fractional.summary});
  const bool frac_more_effective = report.rows.back().label == fractional.summary.label;
  const double icer = report.rows.back().ICER;
  const bool cheaper = frac_more_effective && icer < classical.summary.ACER;
  const bool soft = frac_more_effective && within_rel(icer, 6.06, 0.5);
  return {frac_more_effective && cheaper && soft,
          fmt("A(1.000) %.6g, A(0.993) %.6g, classical ACER %.4g, ICER of %s %.4g", classical.summary.A,
              fractional.summary.A, classical.summary.ACER, report.rows.back().label.c_str(), icer)};
}

Outcome fit_recovery() {
  bool pass = true;
  std::string detail;
  for (double truth : {0.90, 0.95, 0.99}) {
    auto gen = ModelParams::seirs_hrsv();
    gen.alpha = truth;
    const auto y0 = fitting_initial_state(ModelKind::SEIRS, gen);
    const auto series = synth_series(ModelKind::SEIRS, gen, y0, 35, 1e4, 0.0, 1);
    auto start = gen;
    start.alpha = 1.0;
    const auto fit = fit_alpha(ModelKind::SEIRS, start, y0, series);
    if (!(std::abs(fit.best_alpha - truth) <= 1e-3)) pass = false;
    detail += fmt("%s%.2f -> %.5f", detail.empty() ? "" : ", ", truth, fit.best_alpha);
  }
  return {pass, detail};
}

// Randomized draws on short horizons; documented domain: alpha in [0.9, 1],
// kappa1 in [0.1, 10], kappa2 in [1e-3, 1e-1], t_max in [0.2, 1], phi in [0, 2 pi).
ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto p = ModelParams::seirs_hrsv();
  p.alpha = 0.9 + 0.1 * u(rng);
  p.phi = 2.0 * std::numbers::pi * u(rng);
  p.b1 = 0.3 * u(rng);
  p.c1 = 0.3 * u(rng);
  return p;
}

ControlWeights random_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ControlWeights w;
  w.kappa1 = std::pow(10.0, -1.0 + 2.0 * u(rng));
  w.kappa2 = std::pow(10.0, -3.0 + 2.0 * u(rng));
  w.t_max = 0.2 + 0.8 * u(rng);
  return w;
}

Outcome property_suites(std::uint64_t seed) {
  constexpr int kDraws = 100;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int feasible = 0, transversal = 0, fixed_point = 0, neutral = 0, fbar = 0, ranking = 0, idempotent = 0;

  for (int d = 0; d < kDraws; ++d) {
    const auto p = random_params(rng);
    const auto w = random_weights(rng);
    const auto eq = endemic_equilibrium(p);
    const Grid g(0.0, 1.0, 200);
    const auto sol = solve_focp(p, eq, w, g);

    bool ok = true;
    for (double T : sol.control.values) ok = ok && T >= 0.0 && T <= w.t_max;
    feasible += ok;

    ok = true;
    for (std::size_t c = 0; c < 4; ++c) ok = ok && sol.adjoint(g.n_steps(), c) == 0.0;
    transversal += ok;

    double sup_T = 0.0, resid = 0.0;
    for (double T : sol.control.values) sup_T = std::max(sup_T, T);
    for (std::size_t k = 0; k < g.size(); ++k)
      resid = std::max(resid, std::abs(projected_control(sol.adjoint(k, 2), sol.adjoint(k, 3), sol.state(k, 2), w) -
                                       sol.control.values[k]));
    fixed_point += sol.converged && resid <= SweepSettings{}.tol * std::max(1.0, sup_T);

    // Treatment only moves mass from I to R.
    const SeirsState y{u(rng), u(rng), u(rng), u(rng)};
    const double T = w.t_max * u(rng), t = 5.0 * u(rng);
    const auto with = seirs_controlled_rhs(t, y, T, p);
    const auto without = seirs_controlled_rhs(t, y, 0.0, p);
    const double scale = std::max(1.0, T * y.I);
    neutral += std::abs((with[0] + with[1] + with[2] + with[3]) - (without[0] + without[1] + without[2] + without[3])) <=
                   1e-12 * scale &&
               with[0] == without[0] && with[1] == without[1] &&
               std::abs(with[2] - without[2] + T * y.I) <= 1e-12 * scale &&
               std::abs(with[3] - without[3] - T * y.I) <= 1e-12 * scale;

    // Fbar from the averted count against the time average of F.
    const auto s = summarize(Strategy{"draw", sol.state, sol.control, eq.I, 1.0});
    const auto F = efficacy_series(sol.state, eq.I);
    const double mean_F = trapezoid(F, g.step()) / (g.tf() - g.t0());
    fbar += std::abs(s.Fbar - mean_F) <= 1e-12 * std::max(1.0, std::abs(mean_F)) &&
            std::abs(s.Fbar - s.A / (g.tf() * eq.I)) <= 1e-15;

    // ICER rule against a from-scratch recomputation.
    std::vector<StrategySummary> set;
    const int m = 2 + static_cast<int>(4 * u(rng));
    for (int i = 0; i < m; ++i) {
      StrategySummary x;
      x.label = "s" + std::to_string(i);
      x.A = (u(rng) - 0.1) * 0.01;
      x.TC = 0.1 * u(rng);
      x.ACER = x.A != 0.0 ? x.TC / x.A : 0.0;
      set.push_back(x);
    }
    const auto report = icer_rank(set);
    auto sorted = set;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.A < b.A; });
    ok = report.rows.size() == sorted.size();
    for (std::size_t i = 0; ok && i < sorted.size(); ++i) {
      const double expect = i == 0 ? sorted[0].TC / sorted[0].A
                                   : (sorted[i].TC - sorted[i - 1].TC) / (sorted[i].A - sorted[i - 1].A);
      ok = report.rows[i].label == sorted[i].label && std::abs(report.rows[i].ICER - expect) <= 1e-12 * std::abs(expect);
    }
    ranking += ok;

    // Two runs of the same simulate config produce identical bytes.
    const auto base = scratch("ac7_" + std::to_string(d));
    {
      std::ofstream(base / "run.cfg") << "params.alpha = " << format_real(p.alpha) << "\nparams.phi = "
                                      << format_real(p.phi) << "\ngrid.tf = 1\ngrid.n_steps = 200\n";
    }
    AppOptions a, b;
    a.config_path = b.config_path = (base / "run.cfg").string();
    a.out_dir = (base / "a").string();
    b.out_dir = (base / "b").string();
    std::ostringstream sink;
    const bool ran = run_cli("simulate", a, sink, sink) == 0 && run_cli("simulate", b, sink, sink) == 0;
    idempotent += ran && read_file(base / "a" / "trajectory.csv") == read_file(base / "b" / "trajectory.csv");
    fs::remove_all(base);
  }

  const bool pass = feasible == kDraws && transversal == kDraws && fixed_point == kDraws && neutral == kDraws &&
                    fbar == kDraws && ranking == kDraws && idempotent == kDraws;
  return {pass, fmt("feasibility %d, transversality %d, fixed point %d, neutrality %d, Fbar %d, ICER rule %d, "
                    "csv idempotence %d of %d",
                    feasible, transversal, fixed_point, neutral, fbar, ranking, idempotent, kDraws)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 20240611;
  int failures = 0;
  auto check = [&](int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < budget_s;
    const bool ok = o.pass && in_time;
    failures += !ok;
    std::printf("[%s] AC%d %s: %s; %.2f s (limit %.0f s)%s\n", ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
                budget_s, in_time ? "" : " over time");
    std::fflush(stdout);
  };

  check(1, "endemic equilibrium", 1, equilibrium_table);
  check(2, "classical reduction", 10, classical_reduction);
  check(3, "analytic fractional solves", 60, analytic_solves);

  std::optional<FocpRun> classical, fractional;
  check(4, "optimal control targets", 300, [&] {
    fractional = run_default(0.993);
    return focp_targets(*fractional);
  });
  check(5, "ICER comparison", 300, [&] {
    if (!fractional) fractional = run_default(0.993);
    classical = run_default(1.0);
    return icer_comparison(*classical, *fractional);
  });
  check(6, "fit self-consistency", 300, fit_recovery);
  check(7, "property suites", 600, [seed] { return property_suites(seed); });

  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
