#pragma once

#include <span>

namespace fracepi {

/// Composite trapezoidal rule on a uniform grid of spacing h.
inline double trapezoid(std::span<const double> values, double h) {
  if (values.size() < 2) return 0.0;
  double inner = 0.0;
  for (std::size_t k = 1; k + 1 < values.size(); ++k) inner += values[k];
  return h * (inner + 0.5 * (values.front() + values.back()));
}

}  // namespace fracepi
