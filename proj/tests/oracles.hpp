#pragma once

#include "smc/smc.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace smc::test {

/// 1-d target N(0, 1) at every lambda (likelihood identically zero).
inline std::shared_ptr<GaussianTransitionModel> unit_gaussian_1d() {
  return std::make_shared<GaussianTransitionModel>(GaussianDensity::standard(1), GaussianDensity::standard(1), "unit");
}

/// Central finite differences of f at x.
template <class F>
Vec fd_gradient(F&& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// max_j |a_j - b_j| / max(1, max_j |b_j|)
inline double rel_error(const Vec& a, const Vec& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

inline Vec standard_normal(Rng& rng, Eigen::Index d) {
  std::normal_distribution<double> n;
  Vec z(d);
  for (Eigen::Index j = 0; j < d; ++j) z[j] = n(rng);
  return z;
}

/// Cloud of n iid draws from `g`, equally weighted, caches filled from `model`.
inline ParticleCloud gaussian_cloud(const GaussianDensity& g, std::size_t n, const Model& model, Rng& rng) {
  ParticleCloud c;
  const auto d = static_cast<Eigen::Index>(g.dim());
  c.positions.resize(static_cast<Eigen::Index>(n), d);
  c.log_weights = Vec::Zero(static_cast<Eigen::Index>(n));
  c.cached_loglik.resize(static_cast<Eigen::Index>(n));
  c.cached_logprior.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec x = g.sample(rng);
    const auto ii = static_cast<Eigen::Index>(i);
    c.positions.row(ii) = x.transpose();
    c.cached_loglik[ii] = model.log_likelihood(x);
    c.cached_logprior[ii] = model.log_prior(x);
  }
  return c;
}

/// Median |delta_E| of HMC trajectories of fixed length 1 (L = round(1/eps))
/// started from exact draws of the tempered target, one value per eps.
inline std::vector<double> median_energy_error(const GaussianTransitionModel& model, double lambda,
                                               const std::vector<double>& eps, int draws, std::uint64_t seed) {
  TemperedTarget target(std::make_shared<GaussianTransitionModel>(model));
  const GaussianDensity exact = model.exact_tempered(lambda);
  const MassMatrix mass = MassMatrix::from_variance(exact.cov().diagonal());
  std::vector<double> out;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    std::vector<double> errs;
    for (int i = 0; i < draws; ++i) {
      Rng rng = make_stream(seed, k, 0, static_cast<std::uint64_t>(i));
      const Vec x = exact.sample(rng);
      const Vec p = mass.sqrt_diag.cwiseProduct(standard_normal(rng, x.size()));
      const int L = std::max(1, static_cast<int>(std::lround(1.0 / eps[k])));
      errs.push_back(std::abs(hmc_transition(x, p, {eps[k], L}, lambda, target, mass, 0.0).delta_E));
    }
    std::nth_element(errs.begin(), errs.begin() + static_cast<long>(errs.size() / 2), errs.end());
    out.push_back(errs[errs.size() / 2]);
  }
  return out;
}

/// Least-squares slope of log y on log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Largest |z| over the componentwise mean and variance of a cloud after
/// `sweeps` kernel sweeps, started from exact draws of pi_lambda.
inline double invariance_z(KernelKind kind, double scale, int L, const GaussianTransitionModel& model, double lambda,
                           std::size_t n, int sweeps, std::uint64_t seed) {
  TemperedTarget target(std::make_shared<GaussianTransitionModel>(model));
  const GaussianDensity exact = model.exact_tempered(lambda);
  const auto d = static_cast<Eigen::Index>(exact.dim());
  const MassMatrix mass = MassMatrix::from_variance(exact.cov().diagonal());
  RowMat pos(static_cast<Eigen::Index>(n), d);
  parallel_for(n, 1, [&](std::size_t i) {
    Rng rng = make_stream(seed, 0, 1, i);
    Vec x = exact.sample(rng);
    for (int k = 0; k < sweeps; ++k) {
      Rng step = make_stream(seed, 1, static_cast<std::uint64_t>(k), i);
      x = kernel_step(kind, x, scale, L, lambda, target, mass, step).new_position;
    }
    pos.row(static_cast<Eigen::Index>(i)) = x.transpose();
  });
  const double nn = static_cast<double>(n);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mu = exact.mean()[j], var = exact.cov()(j, j);
    const double mean = pos.col(j).mean();
    const double v = (pos.col(j).array() - mu).square().mean();
    worst = std::max(worst, std::abs(mean - mu) / std::sqrt(var / nn));
    worst = std::max(worst, std::abs(v - var) / (var * std::sqrt(2.0 / nn)));
  }
  return worst;
}

inline BinaryDataset synthetic_binary(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n;
  BinaryDataset data;
  data.design.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols + 1));
  data.labels.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    data.design(ii, 0) = 1.0;
    double eta = 0.3;
    for (std::size_t k = 1; k <= cols; ++k) {
      data.design(ii, static_cast<Eigen::Index>(k)) = n(rng);
      eta += (k % 2 == 0 ? -0.8 : 0.6) * data.design(ii, static_cast<Eigen::Index>(k));
    }
    data.labels[ii] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return data;
}

/// Every model family with a spread for random evaluation points.
struct NamedModel {
  std::string name;
  ModelPtr model;
  double point_scale;  // spread of random evaluation points around prior draws
};

inline std::vector<NamedModel> zoo() {
  return {
      {"gaussian", build_gaussian_shift_model(10), 1.0},
      {"mixture", build_mixture_model(5), 1.0},
      {"student", build_student_model(10), 1.0},
      {"logit", build_logit_model(synthetic_binary(80, 4, 7)), 0.5},
      {"probit", build_probit_model(synthetic_binary(80, 4, 8)), 0.5},
      {"lgcp", build_lgcp_model(6), 0.2},
      {"logit-laplace", with_laplace_reference(build_logit_model(synthetic_binary(80, 4, 9))), 0.5},
  };
}


/// Leapfrog on a Gaussian target is linear in (x, p); returns its matrix.
inline Mat leapfrog_matrix(const TemperedTarget& target, const MassMatrix& mass, double eps, int L, double lambda) {
  const auto d = static_cast<Eigen::Index>(target.dim());
  auto map = [&](const Vec& z) {
    const auto r = leapfrog(z.head(d), z.tail(d), eps, L, lambda, target, mass);
    Vec out(2 * d);
    out << r.x, r.p;
    return out;
  };
  const Vec base = map(Vec::Zero(2 * d));
  Mat J(2 * d, 2 * d);
  for (Eigen::Index j = 0; j < 2 * d; ++j) J.col(j) = map(Vec::Unit(2 * d, j)) - base;
  return J;
}

/// Largest relative error between analytic and finite-difference gradients
/// of the tempered log-density over `points` random (x, lambda).
inline double worst_gradient_error(const NamedModel& m, int points, std::uint64_t seed) {
  TemperedTarget target(m.model);
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const double lambda = rng.uniform();
    const Vec x = m.model->sample_prior(rng) + m.point_scale * standard_normal(rng, static_cast<Eigen::Index>(m.model->dim()));
    const Vec g = target.tempered_grad(x, lambda);
    const Vec fd = fd_gradient([&](const Vec& z) { return target.tempered_logpdf(z, lambda); }, x);
    worst = std::max(worst, rel_error(g, fd));
  }
  return worst;
}

}  // namespace smc::test
