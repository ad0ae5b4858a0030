#pragma once

#include "smc/errors.hpp"
#include "smc/models/gaussian.hpp"
#include "smc/models/model.hpp"

#include <memory>
#include <string>

namespace smc {

class LaplaceError : public NumericalError {
 public:
  LaplaceError(const std::string& what, Vec last_iterate)
      : NumericalError(what), last_iterate_(std::move(last_iterate)) {}
  const Vec& last_iterate() const { return last_iterate_; }

 private:
  Vec last_iterate_;
};

struct LaplaceOptions {
  int max_iterations = 20000;
  double gradient_tolerance = 1e-9;
  double hessian_step = 1e-5;
};

/// Gaussian approximation N(m, H^{-1}) of the posterior p(x) l(y|x): m is found
/// by gradient ascent with a backtracking (Armijo) line search seeded by a
/// Barzilai-Borwein step; H is the negative finite-difference Jacobian of the
/// gradient at m. Does not touch any evaluation counters.
inline GaussianDensity laplace_init(const Model& model, const LaplaceOptions& opt = {}) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  auto logpost = [&](const Vec& x) { return model.log_prior(x) + model.log_likelihood(x); };
  auto grad = [&](const Vec& x) -> Vec { return model.grad_log_prior(x) + model.grad_log_likelihood(x); };

  Vec x = Vec::Zero(d);
  Vec g = grad(x);
  double f = logpost(x);
  if (!g.allFinite() || !std::isfinite(f)) throw LaplaceError("laplace_init: non-finite gradient at start point", x);

  double step = 1.0 / std::max(1.0, g.norm());
  bool converged = g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance;
  for (int it = 0; it < opt.max_iterations && !converged; ++it) {
    double t = step;
    Vec x_new;
    double f_new = kNegInf;
    for (int bt = 0; bt < 60; ++bt) {
      x_new = x + t * g;
      f_new = logpost(x_new);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * t * g.squaredNorm()) break;
      t *= 0.5;
    }
    if (!std::isfinite(f_new) || f_new < f) {
      // line search exhausted; accept only if the gradient is already tiny
      if (g.lpNorm<Eigen::Infinity>() < 1e3 * opt.gradient_tolerance) break;
      throw LaplaceError("laplace_init: line search failed", x);
    }
    const Vec g_new = grad(x_new);
    if (!g_new.allFinite()) throw LaplaceError("laplace_init: non-finite gradient", x_new);
    const Vec s = x_new - x;
    const Vec y = g - g_new;  // ascent: curvature of -logpost
    const double sy = s.dot(y);
    step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * t;
    x = x_new;
    g = g_new;
    f = f_new;
    converged = g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance;
  }
  if (!converged && g.lpNorm<Eigen::Infinity>() >= 1e3 * opt.gradient_tolerance)
    throw LaplaceError("laplace_init: no convergence after max iterations", x);

  Mat hessian(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double h = opt.hessian_step * std::max(1.0, std::abs(x[j]));
    Vec xp = x;
    Vec xm = x;
    xp[j] += h;
    xm[j] -= h;
    hessian.col(j) = -(grad(xp) - grad(xm)) / (2.0 * h);
  }
  const Mat sym = 0.5 * (hessian + hessian.transpose());
  Eigen::LLT<Mat> llt(sym);
  if (llt.info() != Eigen::Success) throw LaplaceError("laplace_init: Hessian not positive definite at mode", x);
  Mat cov = llt.solve(Mat::Identity(d, d));
  cov = 0.5 * (cov + cov.transpose());
  return {x, cov};
}

/// Re-expresses a posterior with a Gaussian pi_0: the tempering likelihood
/// becomes p(x) l(y|x) / pi_0(x), so the ladder interpolates pi_0 -> posterior
/// and Z_T / Z_0 is the original marginal likelihood.
class ReferenceTemperedModel final : public Model {
 public:
  ReferenceTemperedModel(ModelPtr base, GaussianDensity reference)
      : base_(std::move(base)), reference_(std::move(reference)) {
    if (!base_ || base_->dim() != reference_.dim()) throw ConfigError("ReferenceTemperedModel: dimension mismatch");
  }

  std::size_t dim() const override { return base_->dim(); }
  std::string name() const override { return base_->name(); }
  const Model& base() const { return *base_; }
  const GaussianDensity& reference() const { return reference_; }

  double log_prior(const Vec& x) const override { return reference_.logpdf(x); }
  double log_likelihood(const Vec& x) const override {
    return base_->log_prior(x) + base_->log_likelihood(x) - reference_.logpdf(x);
  }
  Vec grad_log_prior(const Vec& x) const override { return reference_.grad_logpdf(x); }
  Vec grad_log_likelihood(const Vec& x) const override {
    return base_->grad_log_prior(x) + base_->grad_log_likelihood(x) - reference_.grad_logpdf(x);
  }
  Vec sample_prior(Rng& rng) const override { return reference_.sample(rng); }

 private:
  ModelPtr base_;
  GaussianDensity reference_;
};

inline std::shared_ptr<ReferenceTemperedModel> with_laplace_reference(ModelPtr base, const LaplaceOptions& opt = {}) {
  GaussianDensity ref = laplace_init(*base, opt);
  return std::make_shared<ReferenceTemperedModel>(std::move(base), std::move(ref));
}

}  // namespace smc
