#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace smc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
/// Particle storage: one particle per row.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline bool all_finite(const Eigen::Ref<const Vec>& x) { return x.allFinite(); }

/// log(sum(exp(v))) with max shifting; -inf when every entry is -inf.
inline double logsumexp(const Eigen::Ref<const Vec>& v) {
  if (v.size() == 0) return kNegInf;
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

/// n equally spaced values on [lo, hi]; a single value collapses to lo.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

/// log of the standard normal CDF, finite for every finite argument.
inline double log_normal_cdf(double x) {
  if (x < -30.0) {
    // Mills-ratio expansion: Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6)
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -0.5 * x2 - 0.5 * kLog2Pi - std::log(-x) + std::log(series);
  }
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
}

/// d/dx log Phi(x) = phi(x) / Phi(x).
inline double normal_hazard_ratio(double x) {
  if (x < -30.0) {
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -x / series;
  }
  const double log_phi = -0.5 * x * x - 0.5 * kLog2Pi;
  return std::exp(log_phi - log_normal_cdf(x));
}

}  // namespace smc
