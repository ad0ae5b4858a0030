#pragma once

#include "smc/engine/particles.hpp"
#include "smc/errors.hpp"
#include "smc/linalg.hpp"

namespace smc {

struct TemperatureSearch {
  double tolerance = 1e-12;  // bracket width in lambda
  int max_iterations = 100;
  int fallback_grid = 10000;
};

/// ESS of the incremental weights l(y|x)^delta.
inline double incremental_ess(const Vec& loglik, double delta) {
  Vec lw(loglik.size());
  for (Eigen::Index i = 0; i < lw.size(); ++i) {
    const double l = loglik[i];
    lw[i] = delta == 0.0 ? 0.0 : (std::isnan(l) ? kNegInf : delta * l);
  }
  return ess(lw);
}

/// Next exponent: 1 when ESS(1) >= alpha * N, otherwise the upper end of a
/// bisection bracket on ESS(lambda) = alpha * N, so ESS(lambda_t) < alpha * N
/// and |lambda_t - root| < tolerance. If the bracket check fails, scans a grid
/// for the smallest lambda whose ESS is at or below the target.
inline double next_temperature(const Vec& loglik, double lambda_prev, double alpha, std::size_t n,
                               const TemperatureSearch& search = {}) {
  if (!(lambda_prev >= 0.0 && lambda_prev < 1.0)) throw ConfigError("next_temperature: lambda_prev must be in [0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("next_temperature: alpha must be in (0,1)");
  const double target = alpha * static_cast<double>(n);
  auto ess_at = [&](double lambda) { return incremental_ess(loglik, lambda - lambda_prev); };

  if (ess_at(1.0) >= target) return 1.0;

  double lo = lambda_prev;
  double hi = 1.0;
  if (ess_at(lo) >= target) {
    for (int it = 0; it < search.max_iterations && hi - lo > search.tolerance; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (ess_at(mid) >= target)
        lo = mid;
      else
        hi = mid;
    }
    return hi;
  }

  for (int k = 1; k <= search.fallback_grid; ++k) {
    const double lambda = lambda_prev + (1.0 - lambda_prev) * k / search.fallback_grid;
    if (ess_at(lambda) <= target) return lambda;
  }
  throw NumericalError("next_temperature: no admissible exponent above lambda_prev");
}

}  // namespace smc
