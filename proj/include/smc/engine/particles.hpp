#pragma once

#include "smc/errors.hpp"
#include "smc/linalg.hpp"
#include "smc/rng.hpp"

#include <cstddef>
#include <vector>

namespace smc {

struct ParticleCloud {
  RowMat positions;     // N x d
  Vec log_weights;      // unnormalized
  Vec cached_loglik;    // log l(y | x^i)
  Vec cached_logprior;  // log p(x^i)
  bool resampled = true;

  std::size_t size() const { return static_cast<std::size_t>(positions.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(positions.cols()); }

  Vec position(std::size_t i) const { return positions.row(static_cast<Eigen::Index>(i)).transpose(); }
};

/// Diagonal mass matrix M = diag(mass); inv_diag holds the per-coordinate variances.
struct MassMatrix {
  Vec diag;
  Vec inv_diag;
  Vec sqrt_diag;

  static MassMatrix identity(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    return {Vec::Ones(n), Vec::Ones(n), Vec::Ones(n)};
  }

  static MassMatrix from_variance(const Vec& variance) {
    MassMatrix m;
    m.inv_diag = variance;
    m.diag = variance.cwiseInverse();
    m.sqrt_diag = m.diag.cwiseSqrt();
    return m;
  }

  std::size_t dim() const { return static_cast<std::size_t>(diag.size()); }
};

inline constexpr double kVarianceFloor = 1e-8;

/// Self-normalized weights exp(lw - logsumexp(lw)).
inline Vec normalized_weights(const Vec& log_weights) {
  const double lse = logsumexp(log_weights);
  if (!std::isfinite(lse)) throw NumericalError("degenerate cloud");
  return (log_weights.array() - lse).exp().matrix();
}

/// (sum w)^2 / sum w^2, computed after max-log shifting.
inline double ess(const Vec& log_weights) {
  if (log_weights.size() == 0) throw NumericalError("degenerate cloud");
  const double m = log_weights.maxCoeff();
  if (!std::isfinite(m)) throw NumericalError("degenerate cloud");
  double s1 = 0.0;
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    const double w = std::exp(log_weights[i] - m);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

struct ReweightResult {
  Vec log_weights;
  double log_z_increment = 0.0;
};

/// Multiplies the weights by l(y|x)^(lambda_t - lambda_prev). The increment is
/// log sum_i W_i exp(delta * loglik_i) with W the normalized incoming weights,
/// which equals logsumexp(delta * loglik) - log N for an equally weighted cloud.
inline ReweightResult reweight(const ParticleCloud& cloud, double lambda_prev, double lambda_t) {
  const double delta = lambda_t - lambda_prev;
  ReweightResult out;
  out.log_weights.resize(cloud.log_weights.size());
  for (Eigen::Index i = 0; i < out.log_weights.size(); ++i) {
    const double inc = delta * cloud.cached_loglik[i];
    out.log_weights[i] = cloud.log_weights[i] + (std::isnan(inc) ? kNegInf : inc);
  }
  out.log_z_increment = logsumexp(out.log_weights) - logsumexp(cloud.log_weights);
  return out;
}

enum class ResamplingScheme { systematic, multinomial };

/// Ancestor indices (sorted) drawn from normalized weights.
inline std::vector<std::size_t> resample_indices(const Vec& log_weights, std::size_t n, Rng& rng,
                                                 ResamplingScheme scheme = ResamplingScheme::systematic) {
  const Vec w = normalized_weights(log_weights);
  const auto m = static_cast<std::size_t>(w.size());
  std::vector<std::size_t> out(n);
  if (scheme == ResamplingScheme::systematic) {
    const double u0 = rng.uniform() / static_cast<double>(n);
    double cum = w[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = u0 + static_cast<double>(i) / static_cast<double>(n);
      while (u >= cum && j + 1 < m) cum += w[static_cast<Eigen::Index>(++j)];
      out[i] = j;
    }
    return out;
  }
  // multinomial via sorted uniforms (exponential spacings)
  std::vector<double> points(n + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    acc += -std::log1p(-rng.uniform());
    points[i] = acc;
  }
  double cum = w[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = points[i] / points[n];
    while (u >= cum && j + 1 < m) cum += w[static_cast<Eigen::Index>(++j)];
    out[i] = j;
  }
  return out;
}

/// Resamples positions and caches in place; weights become uniform.
inline void resample(ParticleCloud& cloud, Rng& rng, ResamplingScheme scheme = ResamplingScheme::systematic) {
  const std::size_t n = cloud.size();
  const auto idx = resample_indices(cloud.log_weights, n, rng, scheme);
  RowMat pos(cloud.positions.rows(), cloud.positions.cols());
  Vec ll(cloud.cached_loglik.size());
  Vec lp(cloud.cached_logprior.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<Eigen::Index>(idx[i]);
    const auto ii = static_cast<Eigen::Index>(i);
    pos.row(ii) = cloud.positions.row(a);
    ll[ii] = cloud.cached_loglik[a];
    lp[ii] = cloud.cached_logprior[a];
  }
  cloud.positions = std::move(pos);
  cloud.cached_loglik = std::move(ll);
  cloud.cached_logprior = std::move(lp);
  cloud.log_weights.setZero();
  cloud.resampled = true;
}

struct WeightedMoments {
  Vec mean;
  Vec variance;  // diagonal
};

inline WeightedMoments weighted_moments(const ParticleCloud& cloud) {
  const Vec w = normalized_weights(cloud.log_weights);
  WeightedMoments m;
  m.mean = cloud.positions.transpose() * w;
  m.variance = Vec::Zero(m.mean.size());
  for (Eigen::Index i = 0; i < cloud.positions.rows(); ++i)
    m.variance += w[i] * (cloud.positions.row(i).transpose() - m.mean).cwiseAbs2();
  return m;
}

/// diag(M) = 1 / weighted variance, floored at kVarianceFloor.
inline MassMatrix update_mass_matrix(const ParticleCloud& cloud) {
  if (cloud.size() < 2) throw ConfigError("update_mass_matrix needs at least two particles");
  Vec var = weighted_moments(cloud).variance;
  for (Eigen::Index j = 0; j < var.size(); ++j)
    if (!(var[j] >= kVarianceFloor) || !std::isfinite(var[j])) var[j] = kVarianceFloor;
  return MassMatrix::from_variance(var);
}

}  // namespace smc
