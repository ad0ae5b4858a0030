#pragma once

#include "smc/engine/particles.hpp"
#include "smc/errors.hpp"
#include "smc/kernels.hpp"
#include "smc/linalg.hpp"
#include "smc/parallel.hpp"
#include "smc/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace smc {

/// Per-particle kernel parameters. `scale` is eps for HMC and sigma for RW/MALA;
/// `steps` is the leapfrog count (always 1 for RW/MALA).
struct ParamPopulation {
  std::vector<double> scale;
  std::vector<int> steps;
  std::vector<double> utility;
  double scale_star = 0.1;
  int L_max = 100;

  std::size_t size() const { return scale.size(); }
  bool has_utilities() const { return utility.size() == scale.size() && !utility.empty(); }
};

struct QuadraticFit {
  double alpha0 = 0.0;
  double alpha1 = 0.0;

  double operator()(double eps) const { return alpha0 + alpha1 * eps * eps; }
};

struct TuningConstants {
  double ft_noise_sd = 0.015;
  double target_accept_hmc = 0.9;
  double target_accept_mala = 0.574;
  double target_accept_rw = 0.234;
  double eps_init_max = 0.1;
  double scale_init_max = 1.0;
  int lmax_init = 100;
  int lmax_step = 5;
  int lmax_floor = 5;
  double lmax_fraction = 0.1;
  double lmax_high = 0.9;
  double lmax_low = 0.5;
  double explore_lower_fraction = 1e-6;
  /// Exploration is repeated with the refitted bound while it grows by more
  /// than `pretune_growth_trigger`, up to this many passes in total.
  int pretune_max_rounds = 3;
  double pretune_growth_trigger = 2.0;
  /// |delta_E| values fed to the regression are capped here.
  double abs_delta_cap = 1e4;

  double target_accept(KernelKind k) const {
    switch (k) {
      case KernelKind::hmc: return target_accept_hmc;
      case KernelKind::mala: return target_accept_mala;
      case KernelKind::rw: return target_accept_rw;
    }
    return target_accept_hmc;
  }
};

/// Rao-Blackwellized jump utility: |x_prev - x_hat|^2_M / L * min(1, exp(delta_E)),
/// with the distance measured in units of the particle variances (weights diag(M)).
inline double wsjd_utility(const Vec& x_prev, const Vec& x_hat, int L, double delta_E, const MassMatrix& mass) {
  if (L < 1) throw ConfigError("wsjd_utility: L must be >= 1");
  if (delta_E == kNegInf || std::isnan(delta_E) || !x_hat.allFinite()) return 0.0;
  const double accept = delta_E >= 0.0 ? 1.0 : std::exp(delta_E);
  return (x_prev - x_hat).cwiseAbs2().dot(mass.diag) / static_cast<double>(L) * accept;
}

/// Draws from N(mean, sd^2) truncated to (0, inf); mean must be > 0.
inline double truncated_normal_positive(double mean, double sd, Rng& rng) {
  if (sd <= 0.0) return mean;
  if (mean >= 2.0 * sd) {
    std::normal_distribution<double> normal(mean, sd);
    for (;;) {
      const double v = normal(rng);
      if (v > 0.0) return v;
    }
  }
  // inverse CDF on the upper tail: 1 - u = (1 - v) * Phi(mean / sd)
  const double upper_mass = std::exp(log_normal_cdf(mean / sd));
  for (;;) {
    const double tail = (1.0 - rng.uniform()) * upper_mass;
    const double z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * tail);
    const double v = mean + sd * z;
    if (v > 0.0) return v;
  }
}

/// Index drawn with probability proportional to weights (uniform if all zero).
inline std::size_t categorical_draw(const std::vector<double>& cumulative, Rng& rng) {
  const double total = cumulative.back();
  if (!(total > 0.0)) return static_cast<std::size_t>(rng.uniform() * static_cast<double>(cumulative.size()));
  const double u = rng.uniform() * total;
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

inline std::vector<double> cumulative_weights(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += (std::isfinite(w[i]) && w[i] > 0.0) ? w[i] : 0.0;
    c[i] = acc;
  }
  return c;
}

struct FtOptions {
  double noise_sd = 0.015;
  bool perturb_steps = true;
};

/// Resample-and-perturb update: ancestor ~ Cat(utility), then
/// eps' ~ TN(eps_anc, sd^2) on (0, inf) and L' uniform on {L-1, L, L+1}
/// clamped to [1, L_max]. Sampling the ancestor first is exactly the mixture
/// sum_i w_i R(h; h_i) at O(N) cost.
template <class RngFor>
ParamPopulation ft_update(const ParamPopulation& pop, RngFor&& rng_for, const FtOptions& opt = {}) {
  const std::size_t n = pop.size();
  if (!pop.has_utilities()) throw ConfigError("ft_update: population has no utilities");
  const auto cum = cumulative_weights(pop.utility);
  ParamPopulation out;
  out.scale.resize(n);
  out.steps.resize(n);
  out.scale_star = pop.scale_star;
  out.L_max = pop.L_max;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = rng_for(i);
    const std::size_t a = categorical_draw(cum, rng);
    out.scale[i] = truncated_normal_positive(pop.scale[a], opt.noise_sd, rng);
    int L = pop.steps[a];
    if (opt.perturb_steps) {
      const double u = rng.uniform();
      L += u < 1.0 / 3.0 ? -1 : (u < 2.0 / 3.0 ? 0 : 1);
    }
    out.steps[i] = std::clamp(L, 1, std::max(1, pop.L_max));
  }
  return out;
}

/// Median (L1) regression of y on (1, x^2) by iteratively reweighted least
/// squares with weights 1 / max(|r|, 1e-8).
inline QuadraticFit median_regression_quadratic(const std::vector<double>& y, const std::vector<double>& eps,
                                                int max_iterations = 50, double rel_tol = 1e-10) {
  const std::size_t n = y.size();
  if (n != eps.size() || n < 2) throw NumericalError("pretune regression failed: size mismatch");
  std::vector<double> x2(n);
  for (std::size_t i = 0; i < n; ++i) x2[i] = eps[i] * eps[i];
  const auto [mn, mx] = std::minmax_element(x2.begin(), x2.end());
  if (!(*mx > *mn)) throw NumericalError("pretune regression failed: degenerate design");

  std::vector<double> w(n, 1.0);
  QuadraticFit fit;
  for (int it = 0; it < max_iterations; ++it) {
    double sw = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sw += w[i];
      sx += w[i] * x2[i];
      sxx += w[i] * x2[i] * x2[i];
      sy += w[i] * y[i];
      sxy += w[i] * x2[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw NumericalError("pretune regression failed: singular system");
    QuadraticFit next{(sxx * sy - sx * sxy) / det, (sw * sxy - sx * sy) / det};
    const double change = std::abs(next.alpha0 - fit.alpha0) + std::abs(next.alpha1 - fit.alpha1);
    const double scale = std::abs(next.alpha0) + std::abs(next.alpha1);
    fit = next;
    if (it > 0 && change <= rel_tol * std::max(scale, 1e-300)) break;
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(std::abs(y[i] - fit.alpha0 - fit.alpha1 * x2[i]), 1e-8);
  }
  if (!std::isfinite(fit.alpha0) || !std::isfinite(fit.alpha1)) throw NumericalError("pretune regression failed");
  return fit;
}

enum class StarUpdate { solved, shrunk, grown };

struct EpsStarFit {
  QuadraticFit fit;
  double eps_star = 0.0;
  StarUpdate update = StarUpdate::solved;
};

/// Fits |delta_E| = a0 + a1 eps^2 by median regression and solves
/// a0 + a1 eps*^2 = target. An intercept at or above the target halves the
/// previous bound; a non-increasing fit below the target doubles it.
inline EpsStarFit fit_eps_star(const std::vector<double>& abs_delta_E, const std::vector<double>& eps_samples,
                               double target = std::abs(std::log(0.9)), double eps_star_prev = 0.1) {
  if (abs_delta_E.size() < 8) throw NumericalError("pretune regression failed: need at least 8 points");
  EpsStarFit out;
  out.fit = median_regression_quadratic(abs_delta_E, eps_samples);
  if (out.fit.alpha0 >= target) {
    out.eps_star = 0.5 * eps_star_prev;
    out.update = StarUpdate::shrunk;
  } else if (out.fit.alpha1 <= 0.0) {
    out.eps_star = 2.0 * eps_star_prev;
    out.update = StarUpdate::grown;
  } else {
    out.eps_star = std::sqrt((target - out.fit.alpha0) / out.fit.alpha1);
  }
  return out;
}

/// Raises L_max by `lmax_step` when at least `lmax_fraction` of the sampled L
/// exceed lmax_high * L_max; lowers it (not below lmax_floor) when fewer than
/// that fraction exceed lmax_low * L_max.
inline int adapt_lmax(const std::vector<int>& sampled_L, int L_max, const TuningConstants& c = {}) {
  if (L_max < 1) throw ConfigError("adapt_lmax: L_max must be >= 1");
  if (sampled_L.empty()) return L_max;
  const double n = static_cast<double>(sampled_L.size());
  const auto count_above = [&](double level) {
    return static_cast<double>(std::count_if(sampled_L.begin(), sampled_L.end(), [&](int l) { return l > level; }));
  };
  if (count_above(c.lmax_high * L_max) / n >= c.lmax_fraction) return L_max + c.lmax_step;
  if (count_above(c.lmax_low * L_max) / n < c.lmax_fraction)
    return std::max(L_max - c.lmax_step, std::min(L_max, c.lmax_floor));
  return L_max;
}

/// Initial population: eps ~ U(0, eps_init_max], L ~ U{1..lmax_init} for HMC;
/// sigma ~ U(0, scale_init_max] for RW/MALA.
template <class RngFor>
ParamPopulation initial_population(KernelKind kind, std::size_t n, RngFor&& rng_for, const TuningConstants& c = {}) {
  ParamPopulation pop;
  pop.scale.resize(n);
  pop.steps.assign(n, 1);
  pop.L_max = kind == KernelKind::hmc ? c.lmax_init : 1;
  pop.scale_star = kind == KernelKind::hmc ? c.eps_init_max : c.scale_init_max;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = rng_for(i);
    pop.scale[i] = pop.scale_star * (1.0 - rng.uniform());
    if (kind == KernelKind::hmc) {
      std::uniform_int_distribution<int> steps(1, c.lmax_init);
      pop.steps[i] = steps(rng);
    }
  }
  return pop;
}

template <class RngFor>
ParamPopulation ft_init(KernelKind kind, std::size_t n, RngFor&& rng_for, const TuningConstants& c = {}) {
  return initial_population(kind, n, std::forward<RngFor>(rng_for), c);
}

template <class RngFor>
ParamPopulation pr_init(KernelKind kind, std::size_t n, RngFor&& rng_for, const TuningConstants& c = {}) {
  return initial_population(kind, n, std::forward<RngFor>(rng_for), c);
}

struct PretuneResult {
  ParamPopulation population;  // production parameters
  double scale_star = 0.0;
  int L_max = 1;
  EpsStarFit fit;
  int rounds = 0;
  bool uniform_fallback = false;
  double explore_accept = 0.0;  // mean min(1, exp(delta_E)) over the last exploration pass
};

/// Pre-tuning pass shared by HMC (Algorithm with L exploration) and RW/MALA
/// (L = 1): explore uniformly, regress |delta_E| on scale^2 to update the
/// bound, then draw production parameters from the explored pairs with
/// probability proportional to their utility. Positions are never modified.
/// `rng_for(round, i)` must return the exploration stream of particle i and
/// `select_for(i)` its selection stream.
template <class ExploreRng, class SelectRng>
PretuneResult pretune(KernelKind kind, const ParticleCloud& cloud, double lambda, const TemperedTarget& target,
                      const MassMatrix& mass, double star_prev, int L_max, ExploreRng&& rng_for,
                      SelectRng&& select_for, const TuningConstants& c = {}, unsigned threads = 1) {
  const std::size_t n = cloud.size();
  if (n < 8) throw NumericalError("pretune regression failed: need at least 8 particles");
  const double accept_target = std::abs(std::log(c.target_accept(kind)));
  const bool hmc = kind == KernelKind::hmc;

  PretuneResult res;
  std::vector<double> eps(n), abs_de(n), util(n), acc(n);
  std::vector<int> steps(n, 1);
  double star = star_prev;
  for (int round = 0; round < std::max(1, c.pretune_max_rounds); ++round) {
    parallel_for(n, threads, [&](std::size_t i) {
      Rng rng = rng_for(static_cast<std::uint64_t>(round), i);
      const double lo = c.explore_lower_fraction * star;
      eps[i] = lo + (star - lo) * rng.uniform();
      if (hmc) {
        std::uniform_int_distribution<int> dist(1, std::max(1, L_max));
        steps[i] = dist(rng);
      }
      const Vec x = cloud.position(i);
      const MoveOutcome o = kernel_step(kind, x, eps[i], steps[i], lambda, target, mass, rng);
      abs_de[i] = o.delta_E == kNegInf ? c.abs_delta_cap : std::min(std::abs(o.delta_E), c.abs_delta_cap);
      util[i] = wsjd_utility(x, o.proposal_position, steps[i], o.delta_E, mass);
      acc[i] = o.delta_E >= 0.0 ? 1.0 : std::exp(o.delta_E);
    });
    res.rounds = round + 1;
    res.fit = fit_eps_star(abs_de, eps, accept_target, star);
    const bool grow_again = res.fit.eps_star >= c.pretune_growth_trigger * star;
    if (!grow_again || round + 1 >= c.pretune_max_rounds) break;
    star = res.fit.eps_star;
  }
  res.scale_star = res.fit.eps_star;
  res.explore_accept = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(n);

  const auto cum = cumulative_weights(util);
  res.uniform_fallback = !(cum.back() > 0.0);
  ParamPopulation& pop = res.population;
  pop.scale.resize(n);
  pop.steps.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = select_for(i);
    const std::size_t a = categorical_draw(cum, rng);
    pop.scale[i] = eps[a];
    pop.steps[i] = steps[a];
  }
  res.L_max = hmc ? adapt_lmax(pop.steps, L_max, c) : 1;
  pop.scale_star = res.scale_star;
  pop.L_max = res.L_max;
  return res;
}

template <class ExploreRng, class SelectRng>
PretuneResult pr_pretune(const ParticleCloud& cloud, double lambda, const TemperedTarget& target,
                         const MassMatrix& mass, double eps_star_prev, int L_max, ExploreRng&& rng_for,
                         SelectRng&& select_for, const TuningConstants& c = {}, unsigned threads = 1) {
  return pretune(KernelKind::hmc, cloud, lambda, target, mass, eps_star_prev, L_max, std::forward<ExploreRng>(rng_for),
                 std::forward<SelectRng>(select_for), c, threads);
}

template <class ExploreRng, class SelectRng>
PretuneResult scale_pretune(const ParticleCloud& cloud, double lambda, const TemperedTarget& target,
                            const MassMatrix& mass, KernelKind kind, double scale_star_prev, ExploreRng&& rng_for,
                            SelectRng&& select_for, const TuningConstants& c = {}, unsigned threads = 1) {
  if (kind == KernelKind::hmc) throw ConfigError("scale_pretune is for rw/mala kernels");
  return pretune(kind, cloud, lambda, target, mass, scale_star_prev, 1, std::forward<ExploreRng>(rng_for),
                 std::forward<SelectRng>(select_for), c, threads);
}

}  // namespace smc
