#pragma once

// Analytic toy targets. Each likelihood is the ratio target/pi_0 of two
// normalized densities, so the true log Z_T/Z_0 is 0 for all of them.

#include "smc/models/gaussian.hpp"
#include "smc/models/model.hpp"

#include <cmath>
#include <memory>
#include <random>

namespace smc {

/// Tempers a normalized Gaussian pi_0 towards a normalized Gaussian target.
class GaussianTransitionModel final : public Model {
 public:
  GaussianTransitionModel(GaussianDensity initial, GaussianDensity target, std::string name = "gaussian")
      : initial_(std::move(initial)), target_(std::move(target)), name_(std::move(name)) {
    if (initial_.dim() != target_.dim()) throw ConfigError("GaussianTransitionModel: dimension mismatch");
  }

  std::size_t dim() const override { return initial_.dim(); }
  std::string name() const override { return name_; }

  double log_prior(const Vec& x) const override { return initial_.logpdf(x); }
  double log_likelihood(const Vec& x) const override { return target_.logpdf(x) - initial_.logpdf(x); }
  Vec grad_log_prior(const Vec& x) const override { return initial_.grad_logpdf(x); }
  Vec grad_log_likelihood(const Vec& x) const override {
    return target_.grad_logpdf(x) - initial_.grad_logpdf(x);
  }
  Vec sample_prior(Rng& rng) const override { return initial_.sample(rng); }

  const GaussianDensity& initial() const { return initial_; }
  const GaussianDensity& target() const { return target_; }

  /// pi_lambda is Gaussian with precision (1-l) P0 + l P1.
  GaussianDensity exact_tempered(double lambda) const {
    const Mat p0 = initial_.precision();
    const Mat p1 = target_.precision();
    const Mat prec = (1.0 - lambda) * p0 + lambda * p1;
    const Vec rhs = (1.0 - lambda) * (p0 * initial_.mean()) + lambda * (p1 * target_.mean());
    const Mat cov = prec.llt().solve(Mat::Identity(prec.rows(), prec.cols()));
    Mat sym = 0.5 * (cov + cov.transpose());
    return {sym * rhs, sym};
  }

  /// log(Z_lambda / Z_0) for the unnormalized tempered density.
  double log_normalizer(double lambda) const {
    // Each density is exp(-x'Ax/2 + b'x + c); the product integrates in closed form.
    const Mat p0 = initial_.precision();
    const Mat p1 = target_.precision();
    const Vec b0 = p0 * initial_.mean();
    const Vec b1 = p1 * target_.mean();
    const double c0 = initial_.log_normalizer() - 0.5 * initial_.mean().dot(b0);
    const double c1 = target_.log_normalizer() - 0.5 * target_.mean().dot(b1);
    const Mat a = (1.0 - lambda) * p0 + lambda * p1;
    const Vec b = (1.0 - lambda) * b0 + lambda * b1;
    const double c = (1.0 - lambda) * c0 + lambda * c1;
    const Eigen::LLT<Mat> llt(a);
    const Mat l = llt.matrixL();
    const double log_det_a = 2.0 * l.diagonal().array().log().sum();
    return c + 0.5 * b.dot(llt.solve(b)) + 0.5 * static_cast<double>(dim()) * kLog2Pi - 0.5 * log_det_a;
  }

 private:
  GaussianDensity initial_;
  GaussianDensity target_;
  std::string name_;
};

/// N(0, I_d) towards N(2*1_d, Xi), Xi with 0.7 correlation and variances on [0.1, 10].
inline std::shared_ptr<GaussianTransitionModel> build_gaussian_shift_model(std::size_t d) {
  if (d < 2) throw ConfigError("gaussian model requires dim >= 2");
  const auto n = static_cast<Eigen::Index>(d);
  GaussianDensity target(Vec::Constant(n, 2.0), correlated_covariance(linspace(0.1, 10.0, d), 0.7));
  return std::make_shared<GaussianTransitionModel>(GaussianDensity::standard(d), std::move(target), "gaussian");
}

class MixtureModel final : public Model {
 public:
  static constexpr double kWeightPositive = 0.3;
  static constexpr double kShift = 4.0;

  explicit MixtureModel(std::size_t d)
      : d_(d),
        initial_(Vec::Ones(static_cast<Eigen::Index>(d)), 5.0 * Mat::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))),
        positive_(Vec::Constant(static_cast<Eigen::Index>(d), kShift), correlated_covariance(linspace(1.0, 2.0, d), 0.7)),
        negative_(Vec::Constant(static_cast<Eigen::Index>(d), -kShift), correlated_covariance(linspace(1.0, 2.0, d), 0.1)) {}

  std::size_t dim() const override { return d_; }
  std::string name() const override { return "mixture"; }

  double target_logpdf(const Vec& x) const {
    const double a = std::log(kWeightPositive) + positive_.logpdf(x);
    const double b = std::log(1.0 - kWeightPositive) + negative_.logpdf(x);
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  }

  Vec target_grad(const Vec& x) const {
    const double a = std::log(kWeightPositive) + positive_.logpdf(x);
    const double b = std::log(1.0 - kWeightPositive) + negative_.logpdf(x);
    const double m = std::max(a, b);
    const double wa = std::exp(a - m);
    const double wb = std::exp(b - m);
    const double r = wa / (wa + wb);
    return r * positive_.grad_logpdf(x) + (1.0 - r) * negative_.grad_logpdf(x);
  }

  double log_prior(const Vec& x) const override { return initial_.logpdf(x); }
  double log_likelihood(const Vec& x) const override { return target_logpdf(x) - initial_.logpdf(x); }
  Vec grad_log_prior(const Vec& x) const override { return initial_.grad_logpdf(x); }
  Vec grad_log_likelihood(const Vec& x) const override { return target_grad(x) - initial_.grad_logpdf(x); }
  Vec sample_prior(Rng& rng) const override { return initial_.sample(rng); }

  const GaussianDensity& positive_component() const { return positive_; }
  const GaussianDensity& negative_component() const { return negative_; }

  /// Exact E[(1/d) sum_j 1{x_j >= 0}] under the target.
  double exact_mode_proportion() const {
    double total = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double sd_pos = std::sqrt(positive_.cov()(jj, jj));
      const double sd_neg = std::sqrt(negative_.cov()(jj, jj));
      // P(N(m, s^2) > 0) = Phi(m / s)
      total += kWeightPositive * std::exp(log_normal_cdf(kShift / sd_pos)) +
               (1.0 - kWeightPositive) * std::exp(log_normal_cdf(-kShift / sd_neg));
    }
    return total / static_cast<double>(d_);
  }

  Vec exact_mean() const {
    return kWeightPositive * positive_.mean() + (1.0 - kWeightPositive) * negative_.mean();
  }

  /// Diagonal of the mixture covariance.
  Vec exact_variance() const {
    const Vec mean = exact_mean();
    Vec out(static_cast<Eigen::Index>(d_));
    for (Eigen::Index j = 0; j < out.size(); ++j) {
      const double m2 = kWeightPositive * (positive_.cov()(j, j) + kShift * kShift) +
                        (1.0 - kWeightPositive) * (negative_.cov()(j, j) + kShift * kShift);
      out[j] = m2 - mean[j] * mean[j];
    }
    return out;
  }

 private:
  std::size_t d_;
  GaussianDensity initial_;
  GaussianDensity positive_;
  GaussianDensity negative_;
};

inline std::shared_ptr<MixtureModel> build_mixture_model(std::size_t d) {
  if (d < 1) throw ConfigError("mixture model requires dim >= 1");
  return std::make_shared<MixtureModel>(d);
}

/// Multivariate Student t with location, dense scale matrix and nu degrees of freedom.
class MultivariateT {
 public:
  MultivariateT(double nu, Vec location, Mat scale) : nu_(nu), shape_(std::move(location), std::move(scale)) {
    const double d = static_cast<double>(shape_.dim());
    log_norm_ = std::lgamma(0.5 * (nu_ + d)) - std::lgamma(0.5 * nu_) - 0.5 * d * std::log(nu_ * std::numbers::pi) -
                0.5 * shape_.log_det_cov();
  }

  double nu() const { return nu_; }
  std::size_t dim() const { return shape_.dim(); }
  const Vec& location() const { return shape_.mean(); }
  const Mat& scale() const { return shape_.cov(); }

  double logpdf(const Vec& x) const {
    const double q = shape_.mahalanobis(x);
    return log_norm_ - 0.5 * (nu_ + static_cast<double>(dim())) * std::log1p(q / nu_);
  }

  Vec grad_logpdf(const Vec& x) const {
    const double q = shape_.mahalanobis(x);
    // grad log(1 + q/nu) = 2 Sigma^{-1}(x - mu) / (nu + q)
    return (nu_ + static_cast<double>(dim())) / (nu_ + q) * shape_.grad_logpdf(x);
  }

  Vec sample(Rng& rng) const {
    std::chi_squared_distribution<double> chi2(nu_);
    const double w = chi2(rng);
    const Vec z = shape_.sample(rng) - shape_.mean();
    return shape_.mean() + z / std::sqrt(w / nu_);
  }

 private:
  double nu_;
  GaussianDensity shape_;
  double log_norm_ = 0.0;
};

class StudentModel final : public Model {
 public:
  static constexpr double kInitialDof = 3.0;
  static constexpr double kTargetDof = 10.0;

  explicit StudentModel(std::size_t d)
      : initial_(kInitialDof, Vec::Zero(static_cast<Eigen::Index>(d)), Mat::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))),
        target_(kTargetDof, Vec::Constant(static_cast<Eigen::Index>(d), 2.0), correlated_covariance(linspace(0.1, 10.0, d), 0.7)) {}

  std::size_t dim() const override { return initial_.dim(); }
  std::string name() const override { return "student"; }

  double log_prior(const Vec& x) const override { return initial_.logpdf(x); }
  double log_likelihood(const Vec& x) const override { return target_.logpdf(x) - initial_.logpdf(x); }
  Vec grad_log_prior(const Vec& x) const override { return initial_.grad_logpdf(x); }
  Vec grad_log_likelihood(const Vec& x) const override { return target_.grad_logpdf(x) - initial_.grad_logpdf(x); }
  Vec sample_prior(Rng& rng) const override { return initial_.sample(rng); }

  const MultivariateT& initial() const { return initial_; }
  const MultivariateT& target() const { return target_; }

  Vec exact_mean() const { return target_.location(); }
  /// Diagonal of nu/(nu-2) * Xi.
  Vec exact_variance() const { return kTargetDof / (kTargetDof - 2.0) * target_.scale().diagonal(); }

 private:
  MultivariateT initial_;
  MultivariateT target_;
};

inline std::shared_ptr<StudentModel> build_student_model(std::size_t d) {
  if (d < 2) throw ConfigError("student model requires dim >= 2");
  return std::make_shared<StudentModel>(d);
}

}  // namespace smc
