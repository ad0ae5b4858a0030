#pragma once

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

namespace smc::test {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("smc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

/// Likelihood-free model: log l(y|x) = c everywhere, prior N(0, I).
class ConstantLikelihoodModel final : public Model {
 public:
  ConstantLikelihoodModel(std::size_t d, double c) : prior_(GaussianDensity::standard(d)), c_(c) {}
  std::size_t dim() const override { return prior_.dim(); }
  std::string name() const override { return "constant"; }
  double log_prior(const Vec& x) const override { return prior_.logpdf(x); }
  double log_likelihood(const Vec&) const override { return c_; }
  Vec grad_log_prior(const Vec& x) const override { return prior_.grad_logpdf(x); }
  Vec grad_log_likelihood(const Vec& x) const override { return Vec::Zero(x.size()); }
  Vec sample_prior(Rng& rng) const override { return prior_.sample(rng); }

 private:
  GaussianDensity prior_;
  double c_;
};

}  // namespace smc::test
