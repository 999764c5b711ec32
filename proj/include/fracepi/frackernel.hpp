#pragma once

// Caputo fractional initial-value problems on a uniform grid, stepped with the
// fractional Adams-Bashforth-Moulton predictor-corrector (one corrector pass).

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "fracepi/error.hpp"

namespace fracepi {

/// Uniform time grid t_k = t0 + k*h, k = 0..n_steps.
class Grid {
 public:
  Grid(double t0, double tf, std::size_t n_steps) : t0_(t0), tf_(tf), n_(n_steps) {
    if (!std::isfinite(t0) || !std::isfinite(tf) || !(tf > t0))
      throw DomainError("grid: tf must exceed t0");
    if (n_steps < 1) throw DomainError("grid: n_steps must be >= 1");
    h_ = (tf - t0) / static_cast<double>(n_steps);
  }

  /// Grid with an exact step; tf is derived. Two grids built from the same h
  /// share node times bit-for-bit.
  static Grid with_step(double t0, double h, std::size_t n_steps) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid: step must be positive");
    Grid g(t0, t0 + h * static_cast<double>(n_steps), n_steps);
    g.h_ = h;
    return g;
  }

  double t0() const noexcept { return t0_; }
  double tf() const noexcept { return tf_; }
  std::size_t n_steps() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ + 1; }
  double step() const noexcept { return h_; }
  double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * h_; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.t0_ == b.t0_ && a.h_ == b.h_ && a.n_ == b.n_;
  }

 private:
  double t0_;
  double tf_;
  std::size_t n_;
  double h_ = 0.0;
};

/// Order of the Caputo derivative, 0 < alpha <= 1.
class FractionalOrder {
 public:
  explicit FractionalOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  }
  double value() const noexcept { return alpha_; }
  operator double() const noexcept { return alpha_; }

 private:
  double alpha_;
};

/// Sampled solution: row k holds the state at grid.time(k).
class Trajectory {
 public:
  Trajectory(Grid grid, std::size_t dim) : grid_(grid), dim_(dim), values_(grid.size() * dim, 0.0) {
    if (dim == 0) throw DomainError("trajectory dimension must be positive");
  }

  Trajectory(Grid grid, std::size_t dim, std::vector<double> values)
      : grid_(grid), dim_(dim), values_(std::move(values)) {
    if (dim == 0) throw DomainError("trajectory dimension must be positive");
    if (values_.size() != grid_.size() * dim_) throw ShapeMismatch("trajectory size does not match grid");
    for (double v : values_)
      if (!std::isfinite(v)) throw DomainError("trajectory contains a non-finite value");
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return grid_.size(); }

  double operator()(std::size_t k, std::size_t c) const { return values_[k * dim_ + c]; }
  double& operator()(std::size_t k, std::size_t c) { return values_[k * dim_ + c]; }

  std::span<const double> row(std::size_t k) const { return {values_.data() + k * dim_, dim_}; }
  std::span<double> row(std::size_t k) { return {values_.data() + k * dim_, dim_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = (*this)(k, c);
    return out;
  }

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  Grid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// f(t, y, dy): writes the rate at (t, y) into dy.
template <class F>
concept VectorField = std::invocable<F&, double, std::span<const double>, std::span<double>>;

/// f(node, t, y, dy): as VectorField but also receives the grid node index.
/// The scheme only ever evaluates at grid nodes, so node-sampled inputs
/// (controls, frozen trajectories) can be looked up directly.
template <class F>
concept NodalVectorField =
    std::invocable<F&, std::size_t, double, std::span<const double>, std::span<double>>;

struct PeceWeights {
  /// b[j], including the factor h^alpha / alpha.
  std::vector<double> predictor;
  /// a[j], without the common factor h^alpha / Gamma(alpha + 2).
  std::vector<double> corrector;
};

/// Weights used to advance from node n to node n + 1.
inline PeceWeights pece_weights(std::size_t n, FractionalOrder alpha, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("step h must be positive");
  const double a = alpha.value();
  const double scale = std::pow(h, a) / a;
  PeceWeights w;
  w.predictor.resize(n + 1);
  w.corrector.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double m = static_cast<double>(n - j);
    w.predictor[j] = scale * (std::pow(m + 1.0, a) - std::pow(m, a));
  }
  const double nd = static_cast<double>(n);
  w.corrector[0] = std::pow(nd, a + 1.0) - (nd - a) * std::pow(nd + 1.0, a);
  for (std::size_t j = 1; j <= n; ++j) {
    const double m = static_cast<double>(n - j);
    w.corrector[j] =
        std::pow(m + 2.0, a + 1.0) + std::pow(m, a + 1.0) - 2.0 * std::pow(m + 1.0, a + 1.0);
  }
  return w;
}

namespace detail {

template <class F>
void eval_field(F& f, std::size_t node, double t, std::span<const double> y, std::span<double> dy) {
  if constexpr (NodalVectorField<F>)
    f(node, t, y, dy);
  else
    f(t, y, dy);
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

/// Solves D^alpha y = f(t, y), y(t0) = y0 on the grid.
///
/// The full history of right-hand-side evaluations is kept, so the cost is
/// O(n_steps^2 * dim). Throws DivergenceError at the first node whose
/// predicted or corrected state is not finite.
template <class F>
  requires VectorField<F> || NodalVectorField<F>
Trajectory caputo_pece_solve(F&& f, std::span<const double> y0, const Grid& grid, FractionalOrder alpha) {
  const std::size_t dim = y0.size();
  if (dim == 0) throw DomainError("initial state is empty");
  if (!detail::all_finite(y0)) throw DomainError("initial state is not finite");

  const std::size_t n_steps = grid.n_steps();
  const double a = alpha.value();
  const double h = grid.step();

  // Weights depend on n - j only; tabulate k^a and k^(a+1) once.
  std::vector<double> pow_a(n_steps + 2), pow_a1(n_steps + 2);
  for (std::size_t k = 0; k < pow_a.size(); ++k) {
    const double kd = static_cast<double>(k);
    pow_a[k] = std::pow(kd, a);
    pow_a1[k] = std::pow(kd, a + 1.0);
  }
  std::vector<double> pred_w(n_steps + 1), corr_w(n_steps + 1);
  const double pred_scale = std::pow(h, a) / a / std::tgamma(a);
  for (std::size_t m = 0; m <= n_steps; ++m) pred_w[m] = pred_scale * (pow_a[m + 1] - pow_a[m]);
  for (std::size_t m = 0; m + 1 <= n_steps; ++m) corr_w[m] = pow_a1[m + 2] + pow_a1[m] - 2.0 * pow_a1[m + 1];
  const double corr_scale = std::pow(h, a) / std::tgamma(a + 2.0);

  Trajectory traj(grid, dim);
  std::vector<double> rates((n_steps + 1) * dim);
  std::vector<double> pred_sum(dim), corr_sum(dim), y_pred(dim), f_pred(dim);

  std::copy(y0.begin(), y0.end(), traj.row(0).begin());
  detail::eval_field(f, 0, grid.time(0), traj.row(0), std::span<double>(rates.data(), dim));
  if (!detail::all_finite({rates.data(), dim})) throw DivergenceError(0);

  for (std::size_t n = 0; n < n_steps; ++n) {
    std::fill(pred_sum.begin(), pred_sum.end(), 0.0);
    std::fill(corr_sum.begin(), corr_sum.end(), 0.0);
    const double nd = static_cast<double>(n);
    const double corr_first = pow_a1[n] - (nd - a) * pow_a[n + 1];
    for (std::size_t j = 0; j <= n; ++j) {
      const double bw = pred_w[n - j];
      const double aw = j == 0 ? corr_first : corr_w[n - j];
      const double* fj = rates.data() + j * dim;
      for (std::size_t c = 0; c < dim; ++c) {
        pred_sum[c] += bw * fj[c];
        corr_sum[c] += aw * fj[c];
      }
    }
    for (std::size_t c = 0; c < dim; ++c) y_pred[c] = y0[c] + pred_sum[c];
    if (!detail::all_finite(y_pred)) throw DivergenceError(n + 1);

    const double t_next = grid.time(n + 1);
    detail::eval_field(f, n + 1, t_next, std::span<const double>(y_pred), std::span<double>(f_pred));
    auto y_next = traj.row(n + 1);
    for (std::size_t c = 0; c < dim; ++c) y_next[c] = y0[c] + corr_scale * (f_pred[c] + corr_sum[c]);
    if (!detail::all_finite(y_next)) throw DivergenceError(n + 1);

    std::span<double> f_next(rates.data() + (n + 1) * dim, dim);
    detail::eval_field(f, n + 1, t_next, std::span<const double>(y_next), f_next);
    if (!detail::all_finite(f_next)) throw DivergenceError(n + 1);
  }
  return traj;
}

}  // namespace fracepi
