#pragma once

#include <cmath>

#include "fracepi/error.hpp"

namespace fracepi {

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z,
/// summed from its power series. Intended as a test oracle for |z| <= 50.
inline double mittag_leffler(double alpha, double beta, double z) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("mittag_leffler: alpha and beta must be positive");
  if (!(std::abs(z) <= 50.0)) throw OracleRangeError("mittag_leffler: |z| exceeds 50");
  if (z == 0.0) return 1.0 / std::tgamma(beta);

  const double log_abs_z = std::log(std::abs(z));
  double sum = 0.0;
  double prev_log_mag = -HUGE_VAL;
  constexpr int kMaxTerms = 10000;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double log_mag = k * log_abs_z - std::lgamma(alpha * k + beta);
    const double mag = std::exp(log_mag);
    const double term = (z < 0.0 && (k % 2 == 1)) ? -mag : mag;
    sum += term;
    // Only stop once the terms are past their peak and decreasing.
    const bool decreasing = log_mag < prev_log_mag;
    if (decreasing && (mag <= 1e-15 * std::abs(sum) || mag == 0.0)) return sum;
    prev_log_mag = log_mag;
  }
  throw OracleRangeError("mittag_leffler: series did not converge within 10000 terms");
}

}  // namespace fracepi
