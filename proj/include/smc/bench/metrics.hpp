#pragma once

#include "smc/engine/particles.hpp"
#include "smc/errors.hpp"
#include "smc/kernels.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace smc::bench {

/// (1/N) sum_i T_i with T_i the share of coordinates of particle i that are
/// >= 0 (sign(0) counts as +1); weighted by the normalized particle weights.
inline double mode_proportion(const ParticleCloud& cloud) {
  if (cloud.size() == 0 || cloud.dim() == 0) throw ConfigError("mode_proportion: empty cloud");
  const Vec w = normalized_weights(cloud.log_weights);
  double out = 0.0;
  for (Eigen::Index i = 0; i < cloud.positions.rows(); ++i) {
    const auto positive = (cloud.positions.row(i).array() >= 0.0).count();
    out += w[i] * static_cast<double>(positive) / static_cast<double>(cloud.dim());
  }
  return out;
}

/// Mean over particles and consecutive pairs of clouds of |x_after - x_before|^2,
/// weighted by diag(mass) when a mass matrix is given (raw Euclidean otherwise).
inline double esjd_final(const std::vector<RowMat>& chain, const std::optional<MassMatrix>& mass = std::nullopt) {
  if (chain.size() < 2) throw ConfigError("esjd_final: need at least one sweep at the final temperature");
  double total = 0.0;
  double count = 0.0;
  for (std::size_t s = 1; s < chain.size(); ++s) {
    const RowMat diff = chain[s] - chain[s - 1];
    for (Eigen::Index i = 0; i < diff.rows(); ++i) {
      total += mass ? diff.row(i).cwiseAbs2().dot(mass->diag.transpose()) : diff.row(i).squaredNorm();
      count += 1.0;
    }
  }
  return total / count;
}

/// Load used to adjust variances: gradient + likelihood evaluations, or
/// likelihood evaluations only for the random-walk sampler.
inline double adjustment_load(KernelKind kind, double likelihood_evals, double gradient_evals) {
  return kind == KernelKind::rw ? likelihood_evals : likelihood_evals + gradient_evals;
}

struct Aggregate {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // across repetitions, n - 1 denominator (0 for n < 2)
  std::optional<double> mse;
  double adjusted_variance = 0.0;
  std::optional<double> adjusted_mse;
};

/// Summary of one scalar estimate across repetitions; `load` is the mean
/// computational load of the cell.
inline Aggregate aggregate_metrics(const std::vector<double>& values, std::optional<double> truth, double load) {
  Aggregate a;
  a.n = values.size();
  if (a.n == 0) return a;
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(a.n);
  if (a.n >= 2) {
    for (double v : values) a.variance += (v - a.mean) * (v - a.mean);
    a.variance /= static_cast<double>(a.n - 1);
  }
  if (truth) {
    double s = 0.0;
    for (double v : values) s += (v - *truth) * (v - *truth);
    a.mse = s / static_cast<double>(a.n);
    a.adjusted_mse = *a.mse * load;
  }
  a.adjusted_variance = a.variance * load;
  return a;
}

}  // namespace smc::bench
