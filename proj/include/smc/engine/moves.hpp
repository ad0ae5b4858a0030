#pragma once

#include "smc/engine/particles.hpp"
#include "smc/errors.hpp"
#include "smc/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace smc {

struct MoveOptions {
  double alpha_prime = 0.1;
  int max_steps = 50;
  double active_fraction = 0.1;      // keep moving while at least this share of components is unmixed
  std::optional<int> fixed_steps;    // non-adaptive baseline: exactly this many sweeps
};

struct MoveSummary {
  int steps = 0;
  bool hit_max_steps = false;
  std::vector<Vec> correlations;  // rho_k per sweep
};

/// Pearson correlation, per component, between s(x) = x + x^2 before and
/// after a sweep. Components with zero variance at either lag get 1.
inline Vec lag_correlation(const RowMat& before, const RowMat& after) {
  const Eigen::Index n = before.rows();
  const Eigen::Index d = before.cols();
  Vec rho(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double ma = 0.0, mb = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = before(i, j), b = after(i, j);
      ma += a + a * a;
      mb += b + b * b;
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = before(i, j), b = after(i, j);
      const double u = a + a * a - ma;
      const double v = b + b * b - mb;
      saa += u * u;
      sbb += v * v;
      sab += u * v;
    }
    rho[j] = (saa > 0.0 && sbb > 0.0) ? sab / std::sqrt(saa * sbb) : 1.0;
  }
  return rho;
}

/// Applies `sweep(k, cloud)` (k = 0, 1, ...) until fewer than
/// `active_fraction` of the components have a running product of lag
/// correlations above alpha_prime, or max_steps sweeps have been made.
template <class Sweep>
MoveSummary adaptive_move(ParticleCloud& cloud, Sweep&& sweep, const MoveOptions& opt = {}) {
  if (opt.max_steps < 1) throw ConfigError("adaptive_move: max_steps must be >= 1");
  MoveSummary out;
  if (opt.fixed_steps) {
    if (*opt.fixed_steps < 0) throw ConfigError("adaptive_move: fixed_steps must be >= 0");
    for (int k = 0; k < *opt.fixed_steps; ++k) sweep(k, cloud);
    out.steps = *opt.fixed_steps;
    return out;
  }
  const auto d = static_cast<Eigen::Index>(cloud.dim());
  Vec running = Vec::Ones(d);
  for (int k = 0;; ++k) {
    const RowMat before = cloud.positions;
    sweep(k, cloud);
    out.steps = k + 1;
    const Vec rho = lag_correlation(before, cloud.positions);
    running = running.cwiseProduct(rho);
    out.correlations.push_back(rho);
    const auto unmixed = (running.array() > opt.alpha_prime).count();
    const bool keep_going = static_cast<double>(unmixed) / static_cast<double>(d) >= opt.active_fraction;
    if (!keep_going) break;
    if (out.steps >= opt.max_steps) {
      out.hit_max_steps = true;
      break;
    }
  }
  return out;
}

}  // namespace smc
