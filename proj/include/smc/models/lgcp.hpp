#pragma once

#include "smc/errors.hpp"
#include "smc/models/binary.hpp"
#include "smc/models/gaussian.hpp"
#include "smc/models/lgcp_synthetic_points.hpp"
#include "smc/models/model.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace smc {

/// Cell area used for the Poisson intensity m * exp(x). The grid side g is
/// used (m = 1/g^2), i.e. the intensity is per unit-square cell area. Reading
/// the same symbol as the total dimension would give m = 1/g^4 instead.
enum class LgcpAreaConvention { per_grid_side, per_dimension };
inline constexpr LgcpAreaConvention kLgcpAreaConvention = LgcpAreaConvention::per_grid_side;

struct LgcpGrid {
  static constexpr double kBeta = 1.0 / 33.0;
  static constexpr double kSigma2 = 1.91;

  std::size_t side = 0;
  double beta = kBeta;
  double sigma2 = kSigma2;
  double mu = 0.0;
  double cell_area = 0.0;
  std::vector<int> counts;  // row-major g x g: index j * side + k
  Mat prior_cov;
  Mat prior_chol;

  std::size_t dim() const { return side * side; }
};

using PointPattern = std::vector<std::pair<double, double>>;

inline PointPattern synthetic_lgcp_points() { return {kSyntheticLgcpPoints.begin(), kSyntheticLgcpPoints.end()}; }

/// Two-column x,y file with coordinates in [0, 1); '#' lines and a non-numeric header are skipped.
inline PointPattern load_point_pattern(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open point file: " + path);
  PointPattern out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = detail::split_csv_line(t);
    if (fields.size() != 2) throw IngestionError(path + ":" + std::to_string(line_no) + ": expected two columns");
    const auto x = detail::parse_double(fields[0]);
    const auto y = detail::parse_double(fields[1]);
    if (!x || !y) {
      if (!header_seen && out.empty()) {
        header_seen = true;
        continue;
      }
      throw IngestionError(path + ":" + std::to_string(line_no) + ": non-numeric coordinate");
    }
    if (*x < 0.0 || *x >= 1.0 || *y < 0.0 || *y >= 1.0)
      throw IngestionError(path + ":" + std::to_string(line_no) + ": coordinate outside [0,1)");
    out.emplace_back(*x, *y);
  }
  return out;
}

inline std::vector<int> bin_points(const PointPattern& points, std::size_t side) {
  std::vector<int> counts(side * side, 0);
  for (const auto& [x, y] : points) {
    const auto j = std::min(side - 1, static_cast<std::size_t>(x * static_cast<double>(side)));
    const auto k = std::min(side - 1, static_cast<std::size_t>(y * static_cast<double>(side)));
    ++counts[j * side + k];
  }
  return counts;
}

/// Builds the grid: Sigma = sigma2 * exp(-dist / (g * beta)), mu = log(total) - sigma2 / 2.
inline LgcpGrid make_lgcp_grid(std::size_t side, std::vector<int> counts) {
  if (side < 2) throw ConfigError("lgcp grid side must be >= 2");
  if (counts.size() != side * side) throw ConfigError("lgcp counts must have side^2 entries");
  long total = 0;
  for (int c : counts) {
    if (c < 0) throw ConfigError("lgcp counts must be nonnegative");
    total += c;
  }
  if (total == 0) throw ConfigError("lgcp counts are all zero");

  LgcpGrid g;
  g.side = side;
  g.counts = std::move(counts);
  g.mu = std::log(static_cast<double>(total)) - g.sigma2 / 2.0;
  const double s = static_cast<double>(side);
  g.cell_area = kLgcpAreaConvention == LgcpAreaConvention::per_grid_side ? 1.0 / (s * s) : 1.0 / (s * s * s * s);

  const auto d = static_cast<Eigen::Index>(side * side);
  g.prior_cov.resize(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const double ja = static_cast<double>(a / static_cast<Eigen::Index>(side));
    const double ka = static_cast<double>(a % static_cast<Eigen::Index>(side));
    for (Eigen::Index b = 0; b < d; ++b) {
      const double jb = static_cast<double>(b / static_cast<Eigen::Index>(side));
      const double kb = static_cast<double>(b % static_cast<Eigen::Index>(side));
      const double dist = std::hypot(ja - jb, ka - kb);
      g.prior_cov(a, b) = g.sigma2 * std::exp(-dist / (s * g.beta));
    }
  }
  Eigen::LLT<Mat> llt(g.prior_cov);
  if (llt.info() != Eigen::Success) throw ConfigError("lgcp prior covariance Cholesky failed");
  g.prior_chol = llt.matrixL();
  return g;
}

class LgcpModel final : public Model {
 public:
  explicit LgcpModel(LgcpGrid grid)
      : grid_(std::move(grid)),
        prior_(Vec::Constant(static_cast<Eigen::Index>(grid_.dim()), grid_.mu), grid_.prior_cov),
        counts_(static_cast<Eigen::Index>(grid_.dim())) {
    for (std::size_t i = 0; i < grid_.counts.size(); ++i) counts_[static_cast<Eigen::Index>(i)] = grid_.counts[i];
  }

  std::size_t dim() const override { return grid_.dim(); }
  std::string name() const override { return "lgcp"; }
  const LgcpGrid& grid() const { return grid_; }

  double log_prior(const Vec& x) const override { return prior_.logpdf(x); }
  Vec grad_log_prior(const Vec& x) const override { return prior_.grad_logpdf(x); }
  Vec sample_prior(Rng& rng) const override { return prior_.sample(rng); }

  double log_likelihood(const Vec& x) const override {
    return counts_.dot(x) - grid_.cell_area * x.array().exp().sum();
  }

  Vec grad_log_likelihood(const Vec& x) const override {
    return counts_ - grid_.cell_area * x.array().exp().matrix();
  }

 private:
  LgcpGrid grid_;
  GaussianDensity prior_;
  Vec counts_;
};

inline std::shared_ptr<LgcpModel> build_lgcp_model(std::size_t side, std::vector<int> counts) {
  return std::make_shared<LgcpModel>(make_lgcp_grid(side, std::move(counts)));
}

/// LGCP model on the bundled synthetic 126-point pattern.
inline std::shared_ptr<LgcpModel> build_lgcp_model(std::size_t side) {
  if (side < 2) throw ConfigError("lgcp grid side must be >= 2");
  return build_lgcp_model(side, bin_points(synthetic_lgcp_points(), side));
}

}  // namespace smc
