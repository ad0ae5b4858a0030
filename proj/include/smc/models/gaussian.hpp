#pragma once

#include "smc/errors.hpp"
#include "smc/linalg.hpp"
#include "smc/rng.hpp"

#include <random>
#include <string>

namespace smc {

/// Multivariate normal with a dense covariance, factored once at construction.
class GaussianDensity {
 public:
  GaussianDensity() = default;

  GaussianDensity(Vec mean, Mat cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
      throw ConfigError("GaussianDensity: covariance shape does not match mean");
    chol_ = cov_.llt();
    if (chol_.info() != Eigen::Success) throw ConfigError("GaussianDensity: covariance is not positive definite");
    lower_ = chol_.matrixL();
    const double log_det = 2.0 * lower_.diagonal().array().log().sum();
    log_norm_ = -0.5 * (static_cast<double>(mean_.size()) * kLog2Pi + log_det);
  }

  static GaussianDensity standard(std::size_t d) {
    return {Vec::Zero(static_cast<Eigen::Index>(d)), Mat::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
  }

  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }
  const Mat& chol_lower() const { return lower_; }
  double log_normalizer() const { return log_norm_; }
  double log_det_cov() const { return -2.0 * log_norm_ - static_cast<double>(mean_.size()) * kLog2Pi; }

  /// (x - mean)^T cov^{-1} (x - mean)
  double mahalanobis(const Vec& x) const {
    const Vec z = lower_.triangularView<Eigen::Lower>().solve(x - mean_);
    return z.squaredNorm();
  }

  double logpdf(const Vec& x) const { return log_norm_ - 0.5 * mahalanobis(x); }

  Vec grad_logpdf(const Vec& x) const { return -chol_.solve(x - mean_); }

  Mat precision() const { return chol_.solve(Mat::Identity(cov_.rows(), cov_.cols())); }

  Vec sample(Rng& rng) const {
    std::normal_distribution<double> normal;
    Vec z(mean_.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(rng);
    return mean_ + lower_.triangularView<Eigen::Lower>() * z;
  }

 private:
  Vec mean_;
  Mat cov_;
  Eigen::LLT<Mat> chol_;
  Mat lower_;
  double log_norm_ = 0.0;
};

/// D^{1/2} C D^{1/2} where C has unit diagonal and constant off-diagonal `rho`.
inline Mat correlated_covariance(const std::vector<double>& variances, double rho) {
  const auto d = static_cast<Eigen::Index>(variances.size());
  Mat cov(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      cov(i, j) = (i == j ? 1.0 : rho) *
                  std::sqrt(variances[static_cast<std::size_t>(i)] * variances[static_cast<std::size_t>(j)]);
  return cov;
}

}  // namespace smc
