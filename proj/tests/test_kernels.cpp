#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace smc;
using namespace smc::test;

namespace {

struct ChainStats {
  double mean;
  double variance;
  double mean_se;  // batch-means standard error
};

ChainStats run_chain(KernelKind kind, double scale, int L, int steps, std::uint64_t seed) {
  TemperedTarget target(unit_gaussian_1d());
  const auto mass = MassMatrix::identity(1);
  Rng rng(seed);
  Vec x = Vec::Zero(1);
  std::vector<double> xs(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    x = kernel_step(kind, x, scale, L, 1.0, target, mass, rng).new_position;
    xs[static_cast<std::size_t>(i)] = x[0];
  }
  const int batches = 100;
  const int size = steps / batches;
  double total = 0.0, sq = 0.0, bsq = 0.0;
  for (double v : xs) {
    total += v;
    sq += v * v;
  }
  const double mean = total / steps;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (int i = b * size; i < (b + 1) * size; ++i) s += xs[static_cast<std::size_t>(i)];
    bsq += (s / size - mean) * (s / size - mean);
  }
  return {mean, sq / steps - mean * mean, std::sqrt(bsq / (batches - 1) / batches)};
}

class NanBeyondFive final : public Model {
 public:
  std::size_t dim() const override { return 1; }
  std::string name() const override { return "nan"; }
  double log_prior(const Vec& x) const override { return -0.5 * x.squaredNorm(); }
  double log_likelihood(const Vec& x) const override { return std::abs(x[0]) > 5.0 ? std::nan("") : 0.0; }
  Vec grad_log_prior(const Vec& x) const override { return -x; }
  Vec grad_log_likelihood(const Vec& x) const override {
    return Vec::Constant(1, std::abs(x[0]) > 5.0 ? std::nan("") : 0.0);
  }
  Vec sample_prior(Rng&) const override { return Vec::Zero(1); }
};

}  // namespace

TEST(Hamiltonian, ZeroMomentumIsNegativeLogDensity) {
  TemperedTarget target(build_gaussian_shift_model(3));
  const Vec x = Vec::Constant(3, 0.4);
  EXPECT_EQ(hamiltonian(x, Vec::Zero(3), 0.6, target, MassMatrix::identity(3)), -target.tempered_logpdf(x, 0.6));
}

TEST(Hamiltonian, OneDimensionalExample) {
  TemperedTarget target(unit_gaussian_1d());
  EXPECT_NEAR(hamiltonian(Vec::Zero(1), Vec::Constant(1, 2.0), 0.0, target, MassMatrix::identity(1)),
              0.5 * std::log(2.0 * std::numbers::pi) + 2.0, 1e-14);
}

TEST(Hamiltonian, NonFiniteInputsThrow) {
  TemperedTarget target(unit_gaussian_1d());
  EXPECT_THROW(hamiltonian(Vec::Zero(1), Vec::Constant(1, std::nan("")), 0.0, target, MassMatrix::identity(1)),
               NumericalError);
  EXPECT_THROW(hamiltonian(Vec::Constant(1, INFINITY), Vec::Zero(1), 0.0, target, MassMatrix::identity(1)),
               NumericalError);
}

TEST(Leapfrog, HandComputedStep) {
  TemperedTarget target(unit_gaussian_1d());
  const auto r = leapfrog(Vec::Ones(1), Vec::Zero(1), 0.1, 1, 1.0, target, MassMatrix::identity(1));
  EXPECT_NEAR(r.x[0], 0.995, 1e-12);
  EXPECT_NEAR(r.p[0], -0.1 + std::pow(0.1, 3) / 4.0, 1e-12);
  EXPECT_NEAR(r.p[0], -0.09975, 1e-12);
}

TEST(Leapfrog, Reversibility) {
  auto model = build_gaussian_shift_model(5);
  TemperedTarget target(model);
  Rng rng(1);
  for (int rep = 0; rep < 200; ++rep) {
    const double lambda = rng.uniform();
    const double eps = 0.01 + 0.2 * rng.uniform();
    const int L = 1 + static_cast<int>(rng.uniform() * 50);
    const auto mass = MassMatrix::from_variance(model->exact_tempered(lambda).cov().diagonal());
    const Vec x = model->exact_tempered(lambda).sample(rng);
    const Vec p = mass.sqrt_diag.cwiseProduct(standard_normal(rng, 5));
    const auto fwd = leapfrog(x, p, eps, L, lambda, target, mass);
    const auto back = leapfrog(fwd.x, -fwd.p, eps, L, lambda, target, mass);
    ASSERT_FALSE(fwd.diverged);
    EXPECT_LT((back.x - x).lpNorm<Eigen::Infinity>(), 1e-10 * std::max(1.0, x.lpNorm<Eigen::Infinity>()));
    EXPECT_LT((back.p + p).lpNorm<Eigen::Infinity>(), 1e-10 * std::max(1.0, p.lpNorm<Eigen::Infinity>()));
  }
}

TEST(Leapfrog, UnitJacobianDeterminant) {
  {
    TemperedTarget target(unit_gaussian_1d());
    for (double eps : {0.05, 0.3, 1.1})
      for (int L : {1, 4, 17})
        EXPECT_NEAR(leapfrog_matrix(target, MassMatrix::identity(1), eps, L, 1.0).determinant(), 1.0, 1e-10);
  }
  auto model = build_gaussian_shift_model(3);
  TemperedTarget target(model);
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const double lambda = rng.uniform();
    const auto mass = MassMatrix::from_variance(model->exact_tempered(lambda).cov().diagonal());
    const double eps = 0.02 + 0.2 * rng.uniform();
    const int L = 1 + static_cast<int>(rng.uniform() * 20);
    EXPECT_NEAR(leapfrog_matrix(target, mass, eps, L, lambda).determinant(), 1.0, 1e-9);
  }
}

TEST(Leapfrog, GradientBudget) {
  TemperedTarget target(build_gaussian_shift_model(4));
  Rng rng(3);
  for (int L : {1, 2, 7, 30}) {
    target.reset_counts();
    const auto o = hmc_step(Vec::Constant(4, 0.5), {0.05, L}, 0.7, target, MassMatrix::identity(4), rng);
    EXPECT_EQ(target.counts().gradient, static_cast<std::uint64_t>(L + 1));
    EXPECT_EQ(target.counts().likelihood, 2u);
    EXPECT_EQ(o.grads_used, L + 1);
  }
  target.reset_counts();
  rw_step(Vec::Zero(4), {0.3}, 0.5, target, MassMatrix::identity(4), rng);
  EXPECT_EQ(target.counts().likelihood, 2u);
  EXPECT_EQ(target.counts().gradient, 0u);
  target.reset_counts();
  mala_step(Vec::Zero(4), {0.3}, 0.5, target, MassMatrix::identity(4), rng);
  EXPECT_EQ(target.counts().likelihood, 2u);
  EXPECT_EQ(target.counts().gradient, 2u);
}

TEST(Hmc, TinyStepIsAlwaysAccepted) {
  TemperedTarget target(unit_gaussian_1d());
  Rng rng(4);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto o = hmc_step(Vec::Constant(1, rng.uniform()), {1e-8, 1}, 1.0, target, MassMatrix::identity(1), rng);
    EXPECT_LT(std::abs(o.delta_E), 1e-12);
    accepted += o.accepted;
  }
  EXPECT_GE(accepted, 999);
}

TEST(Hmc, StepBeyondStabilityLimitCollapses) {
  TemperedTarget target(unit_gaussian_1d());
  Rng rng(5);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec x = standard_normal(rng, 1);
    accepted += hmc_step(x, {2.1, 25}, 1.0, target, MassMatrix::identity(1), rng).accepted;
  }
  EXPECT_LT(accepted, 50);
}

TEST(Hmc, LongChainMoments) {
  const auto s = run_chain(KernelKind::hmc, 0.5, 5, 100000, 6);
  EXPECT_NEAR(s.mean, 0.0, 4.0 * s.mean_se);
  EXPECT_NEAR(s.variance, 1.0, 0.05);
}

TEST(Mala, LongChainMoments) {
  const auto s = run_chain(KernelKind::mala, 1.2, 1, 100000, 7);
  EXPECT_NEAR(s.mean, 0.0, 4.0 * s.mean_se);
  EXPECT_NEAR(s.variance, 1.0, 0.05);
}

TEST(RandomWalk, LongChainMoments) {
  const auto s = run_chain(KernelKind::rw, 2.4, 1, 100000, 8);
  EXPECT_NEAR(s.mean, 0.0, 4.0 * s.mean_se);
  EXPECT_NEAR(s.variance, 1.0, 0.05);
}

TEST(Mala, EqualsSingleLeapfrogHmc) {
  auto model = build_gaussian_shift_model(4);
  TemperedTarget target(model);
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const double lambda = rng.uniform();
    const auto mass = MassMatrix::from_variance(model->exact_tempered(lambda).cov().diagonal());
    const Vec x = model->exact_tempered(lambda).sample(rng);
    const Vec xi = standard_normal(rng, 4);
    const double sigma = 0.05 + 0.5 * rng.uniform();
    const double log_u = std::log(rng.uniform());
    const auto m = mala_transition(x, xi, {sigma}, lambda, target, mass, log_u);
    const auto h = hmc_transition(x, mass.sqrt_diag.cwiseProduct(xi), {sigma, 1}, lambda, target, mass, log_u);
    EXPECT_LT((m.proposal_position - h.proposal_position).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_NEAR(m.delta_E, h.delta_E, 1e-9 * std::max(1.0, std::abs(h.delta_E)));
    EXPECT_EQ(m.accepted, h.accepted);
  }
}

TEST(Kernels, HigherDensityProposalAlwaysAccepted) {
  TemperedTarget target(unit_gaussian_1d());
  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    const auto o = rw_step(Vec::Constant(1, 3.0), {0.5}, 1.0, target, MassMatrix::identity(1), rng);
    if (std::abs(o.proposal_position[0]) < 3.0) {
      EXPECT_TRUE(o.accepted);
    }
  }
}

TEST(Kernels, SmallScaleAcceptanceTendsToOne) {
  TemperedTarget target(build_gaussian_shift_model(3));
  Rng rng(11);
  for (KernelKind kind : {KernelKind::mala, KernelKind::rw}) {
    int accepted = 0;
    for (int i = 0; i < 500; ++i)
      accepted += kernel_step(kind, Vec::Constant(3, 1.5), 1e-6, 1, 0.8, target, MassMatrix::identity(3), rng).accepted;
    EXPECT_GE(accepted, 498) << to_string(kind);
  }
}

TEST(Kernels, DivergentTrajectoryIsRejected) {
  TemperedTarget target(std::make_shared<NanBeyondFive>());
  const auto mass = MassMatrix::identity(1);
  const auto o = hmc_transition(Vec::Constant(1, 4.9), Vec::Constant(1, 50.0), {0.1, 10}, 1.0, target, mass, -1e300);
  EXPECT_TRUE(o.diverged);
  EXPECT_FALSE(o.accepted);
  EXPECT_EQ(o.delta_E, kNegInf);
  EXPECT_EQ(o.new_position[0], 4.9);
  EXPECT_EQ(wsjd_utility(Vec::Constant(1, 4.9), o.proposal_position, 10, o.delta_E, mass), 0.0);

  const auto m = mala_transition(Vec::Constant(1, 4.9), Vec::Constant(1, 20.0), {1.0}, 1.0, target, mass, -1e300);
  EXPECT_TRUE(m.diverged);
  EXPECT_FALSE(m.accepted);
}

TEST(Kernels, HugeEnergyErrorIsTreatedAsDivergence) {
  TemperedTarget target(unit_gaussian_1d());
  const auto o = hmc_transition(Vec::Constant(1, 1.0), Vec::Zero(1), {3.0, 60}, 1.0, target, MassMatrix::identity(1), -1e300);
  EXPECT_TRUE(o.diverged);
  EXPECT_EQ(o.delta_E, kNegInf);
}

TEST(Kernels, OneSweepExactInvariance) {
  const auto model = build_gaussian_shift_model(3);
  EXPECT_LT(invariance_z(KernelKind::hmc, 0.4, 5, *model, 0.5, 100000, 1, 21), 4.0);
  EXPECT_LT(invariance_z(KernelKind::mala, 0.8, 1, *model, 0.5, 100000, 1, 22), 4.0);
  EXPECT_LT(invariance_z(KernelKind::rw, 1.0, 1, *model, 0.5, 100000, 1, 23), 4.0);
}

TEST(Kernels, FiftySweepInvariance) {
  const auto model = build_gaussian_shift_model(2);
  EXPECT_LT(invariance_z(KernelKind::hmc, 0.3, 8, *model, 0.3, 4000, 50, 24), 4.0);
  EXPECT_LT(invariance_z(KernelKind::mala, 0.8, 1, *model, 0.3, 4000, 50, 25), 4.0);
  EXPECT_LT(invariance_z(KernelKind::rw, 1.2, 1, *model, 0.3, 4000, 50, 26), 4.0);
}

TEST(Kernels, EnergyErrorScalesQuadratically) {
  const auto model = build_gaussian_shift_model(10);
  const std::vector<double> eps{0.025, 0.05, 0.1, 0.2};
  const auto med = median_energy_error(*model, 1.0, eps, 1000, 27);
  EXPECT_NEAR(loglog_slope(eps, med), 2.0, 0.15);
}
