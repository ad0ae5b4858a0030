#pragma once

// MCMC move kernels targeting p(x) l(y|x)^lambda with a diagonal mass matrix.
//
// Sign convention: delta_E = H(start) - H(proposal), so that min(1, exp(delta_E))
// is the Metropolis acceptance probability and a move is accepted iff
// log(u) <= delta_E.

#include "smc/engine/particles.hpp"
#include "smc/errors.hpp"
#include "smc/linalg.hpp"
#include "smc/models/model.hpp"
#include "smc/rng.hpp"

#include <random>
#include <string>
#include <string_view>

namespace smc {

enum class KernelKind { hmc, mala, rw };

inline std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::hmc: return "hmc";
    case KernelKind::mala: return "mala";
    case KernelKind::rw: return "rw";
  }
  return "?";
}

struct HmcParams {
  double eps = 0.1;
  int L = 1;
};

struct ScaleParams {
  double sigma = 0.1;
};

struct MoveOutcome {
  Vec new_position;
  Vec proposal_position;
  double delta_E = kNegInf;
  bool accepted = false;
  bool diverged = false;
  int grads_used = 0;
  DensityParts start;     // density at the starting point
  DensityParts proposal;  // density at the proposal (valid unless diverged)

  /// Density parts at new_position.
  const DensityParts& current() const { return accepted ? proposal : start; }
};

/// Trajectories with |delta_E| above this are rejected outright.
inline constexpr double kDivergenceThreshold = 1e4;

inline double kinetic_energy(const Vec& p, const MassMatrix& mass) {
  return 0.5 * p.cwiseAbs2().dot(mass.inv_diag);
}

inline double hamiltonian(const Vec& x, const Vec& p, double lambda, const TemperedTarget& target,
                          const MassMatrix& mass) {
  if (!p.allFinite()) throw NumericalError("invalid state");
  return -target.tempered_logpdf(x, lambda) + kinetic_energy(p, mass);
}

struct LeapfrogResult {
  Vec x;
  Vec p;
  bool diverged = false;
  int grads_used = 0;
};

/// L half-kick / drift / half-kick steps; consecutive half kicks share one
/// gradient, so a full trajectory costs L + 1 gradient evaluations.
inline LeapfrogResult leapfrog(Vec x, Vec p, double eps, int L, double lambda, const TemperedTarget& target,
                               const MassMatrix& mass) {
  if (!(eps > 0.0) || L < 1) throw ConfigError("leapfrog: need eps > 0 and L >= 1");
  LeapfrogResult out;
  Vec g = target.tempered_grad(x, lambda);
  out.grads_used = 1;
  for (int l = 0; l < L; ++l) {
    p.noalias() += 0.5 * eps * g;
    x.noalias() += eps * mass.inv_diag.cwiseProduct(p);
    if (!x.allFinite() || !p.allFinite()) {
      out.diverged = true;
      break;
    }
    g = target.tempered_grad(x, lambda);
    ++out.grads_used;
    if (!g.allFinite()) {
      out.diverged = true;
      break;
    }
    p.noalias() += 0.5 * eps * g;
  }
  out.x = std::move(x);
  out.p = std::move(p);
  return out;
}

inline Vec standard_normal_vector(Rng& rng, std::size_t d) {
  std::normal_distribution<double> normal;
  Vec z(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(rng);
  return z;
}

/// HMC transition with the momentum and uniform supplied by the caller.
inline MoveOutcome hmc_transition(const Vec& x, const Vec& p, const HmcParams& params, double lambda,
                                  const TemperedTarget& target, const MassMatrix& mass, double log_u) {
  if (!(params.eps > 0.0) || params.L < 1) throw ConfigError("hmc_step: need eps > 0 and L >= 1");
  MoveOutcome out;
  out.start = target.evaluate(x);
  const double h0 = -out.start.tempered(lambda) + kinetic_energy(p, mass);
  auto lf = leapfrog(x, p, params.eps, params.L, lambda, target, mass);
  out.grads_used = lf.grads_used;
  out.proposal_position = lf.x;
  out.new_position = x;
  if (lf.diverged) {
    out.diverged = true;
    return out;
  }
  out.proposal = target.evaluate(lf.x);
  const double h1 = -out.proposal.tempered(lambda) + kinetic_energy(lf.p, mass);
  const double delta = h0 - h1;
  if (!std::isfinite(delta) || std::abs(delta) > kDivergenceThreshold) {
    out.diverged = true;
    return out;
  }
  out.delta_E = delta;
  if (log_u <= delta) {
    out.accepted = true;
    out.new_position = std::move(lf.x);
  }
  return out;
}

/// One HMC step: p ~ N(0, M), leapfrog, Metropolis correction.
inline MoveOutcome hmc_step(const Vec& x, const HmcParams& params, double lambda, const TemperedTarget& target,
                            const MassMatrix& mass, Rng& rng) {
  const Vec p = mass.sqrt_diag.cwiseProduct(standard_normal_vector(rng, mass.dim()));
  const double log_u = std::log(rng.uniform());
  return hmc_transition(x, p, params, lambda, target, mass, log_u);
}

/// MALA with the exact asymmetric proposal correction; `xi` is the N(0, I) innovation.
inline MoveOutcome mala_transition(const Vec& x, const Vec& xi, const ScaleParams& params, double lambda,
                                   const TemperedTarget& target, const MassMatrix& mass, double log_u) {
  if (!(params.sigma > 0.0)) throw ConfigError("mala_step: need sigma > 0");
  const double s2 = params.sigma * params.sigma;
  MoveOutcome out;
  out.start = target.evaluate(x);
  const Vec g0 = target.tempered_grad(x, lambda);
  out.grads_used = 1;
  const Vec mean0 = x + 0.5 * s2 * mass.inv_diag.cwiseProduct(g0);
  out.proposal_position = mean0 + params.sigma * mass.inv_diag.cwiseSqrt().cwiseProduct(xi);
  out.new_position = x;
  if (!out.proposal_position.allFinite()) {
    out.diverged = true;
    return out;
  }
  out.proposal = target.evaluate(out.proposal_position);
  const Vec g1 = target.tempered_grad(out.proposal_position, lambda);
  out.grads_used = 2;
  if (!g1.allFinite()) {
    out.diverged = true;
    return out;
  }
  const Vec mean1 = out.proposal_position + 0.5 * s2 * mass.inv_diag.cwiseProduct(g1);
  const double log_q_forward = -0.5 / s2 * (out.proposal_position - mean0).cwiseAbs2().dot(mass.diag);
  const double log_q_backward = -0.5 / s2 * (x - mean1).cwiseAbs2().dot(mass.diag);
  const double delta = out.proposal.tempered(lambda) - out.start.tempered(lambda) + log_q_backward - log_q_forward;
  if (!std::isfinite(delta) || std::abs(delta) > kDivergenceThreshold) {
    out.diverged = true;
    return out;
  }
  out.delta_E = delta;
  if (log_u <= delta) {
    out.accepted = true;
    out.new_position = out.proposal_position;
  }
  return out;
}

inline MoveOutcome mala_step(const Vec& x, const ScaleParams& params, double lambda, const TemperedTarget& target,
                             const MassMatrix& mass, Rng& rng) {
  const Vec xi = standard_normal_vector(rng, mass.dim());
  const double log_u = std::log(rng.uniform());
  return mala_transition(x, xi, params, lambda, target, mass, log_u);
}

/// Random-walk Metropolis with proposal x + sigma * M^{-1/2} xi; no gradients.
inline MoveOutcome rw_step(const Vec& x, const ScaleParams& params, double lambda, const TemperedTarget& target,
                           const MassMatrix& mass, Rng& rng) {
  if (!(params.sigma > 0.0)) throw ConfigError("rw_step: need sigma > 0");
  const Vec xi = standard_normal_vector(rng, mass.dim());
  const double log_u = std::log(rng.uniform());
  MoveOutcome out;
  out.start = target.evaluate(x);
  out.proposal_position = x + params.sigma * mass.inv_diag.cwiseSqrt().cwiseProduct(xi);
  out.new_position = x;
  out.proposal = target.evaluate(out.proposal_position);
  const double delta = out.proposal.tempered(lambda) - out.start.tempered(lambda);
  if (std::isnan(delta)) {
    out.diverged = true;
    return out;
  }
  out.delta_E = delta;
  if (log_u <= delta) {
    out.accepted = true;
    out.new_position = out.proposal_position;
  }
  return out;
}

/// Dispatches on the kernel family; `scale` is eps for HMC and sigma otherwise.
inline MoveOutcome kernel_step(KernelKind kind, const Vec& x, double scale, int leapfrog_steps, double lambda,
                               const TemperedTarget& target, const MassMatrix& mass, Rng& rng) {
  switch (kind) {
    case KernelKind::hmc: return hmc_step(x, {scale, leapfrog_steps}, lambda, target, mass, rng);
    case KernelKind::mala: return mala_step(x, {scale}, lambda, target, mass, rng);
    case KernelKind::rw: return rw_step(x, {scale}, lambda, target, mass, rng);
  }
  throw ConfigError("unknown kernel");
}

}  // namespace smc
