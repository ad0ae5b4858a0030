#pragma once

// Tempered SMC sampler: init from the prior, then per step
//   tune -> move (targeting the previous exponent) -> choose next exponent
//   -> reweight and accumulate log Z -> resample if the ESS is low,
// until the exponent reaches 1. An optional extra move phase at lambda = 1
// measures the kernel's jumping distance on the final target.

#include "smc/engine/moves.hpp"
#include "smc/engine/particles.hpp"
#include "smc/engine/temperature.hpp"
#include "smc/engine/trace.hpp"
#include "smc/errors.hpp"
#include "smc/kernels.hpp"
#include "smc/models/model.hpp"
#include "smc/parallel.hpp"
#include "smc/rng.hpp"
#include "smc/tuning.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smc {

enum class TunerKind { ft, pr, fixed };
enum class ResampleTrigger { ess, always };

inline std::string_view to_string(TunerKind k) {
  switch (k) {
    case TunerKind::ft: return "ft";
    case TunerKind::pr: return "pr";
    case TunerKind::fixed: return "fixed";
  }
  return "?";
}

struct SamplerConfig {
  std::size_t n_particles = 1024;
  double alpha = 0.9;  // target ESS fraction for the next exponent
  MoveOptions move;
  ResampleTrigger resample_trigger = ResampleTrigger::ess;
  double resample_threshold = 0.5;
  ResamplingScheme scheme = ResamplingScheme::systematic;
  std::uint64_t seed = 1;
  std::optional<std::vector<double>> fixed_ladder;
  KernelKind kernel = KernelKind::hmc;
  TunerKind tuner = TunerKind::pr;
  double fixed_scale = 0.1;  // tuner "fixed": eps (HMC) or sigma
  int fixed_leapfrog = 10;   // tuner "fixed", HMC only
  TuningConstants tuning;
  TemperatureSearch search;
  bool final_moves = true;
  unsigned threads = 1;
  bool record_wall_time = false;

  void validate() const {
    if (n_particles < 2) throw ConfigError("N must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    if (!(move.alpha_prime > 0.0 && move.alpha_prime <= 1.0)) throw ConfigError("alpha_prime must be in (0,1]");
    if (move.max_steps < 1) throw ConfigError("max_move_steps must be >= 1");
    if (move.fixed_steps && *move.fixed_steps < 1) throw ConfigError("fixed_move_steps must be >= 1");
    if (!(resample_threshold > 0.0 && resample_threshold <= 1.0))
      throw ConfigError("resample_threshold must be in (0,1]");
    if (tuner == TunerKind::fixed && !(fixed_scale > 0.0)) throw ConfigError("fixed_scale must be > 0");
    if (tuner == TunerKind::fixed && fixed_leapfrog < 1) throw ConfigError("fixed_leapfrog must be >= 1");
    if (tuner == TunerKind::pr && n_particles < 8) throw ConfigError("tuner pr needs N >= 8");
    if (!(tuning.ft_noise_sd >= 0.0)) throw ConfigError("ft_noise_sd must be >= 0");
    if (tuning.lmax_init < 1 || tuning.lmax_step < 0) throw ConfigError("invalid L_max constants");
    if (fixed_ladder) {
      const auto& l = *fixed_ladder;
      if (l.size() < 2 || l.front() != 0.0 || l.back() != 1.0)
        throw ConfigError("fixed_ladder must start at 0 and end at 1");
      for (std::size_t i = 1; i < l.size(); ++i)
        if (!(l[i] > l[i - 1])) throw ConfigError("fixed_ladder must be strictly increasing");
    }
  }
};

/// Equi-spaced ladder 0 = l_0 < ... < l_{steps} = 1.
inline std::vector<double> equispaced_ladder(int steps) {
  if (steps < 1) throw ConfigError("ladder needs at least one step");
  std::vector<double> l(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) l[static_cast<std::size_t>(i)] = static_cast<double>(i) / steps;
  l.back() = 1.0;
  return l;
}

/// Linear-interpolated quantile of an unsorted sample.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

class Sampler {
 public:
  Sampler(SamplerConfig config, TemperedTarget& target) : cfg_(std::move(config)), target_(target) {
    cfg_.validate();
  }

  RunTrace run() {
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      if (!cfg_.record_wall_time) return 0.0;
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };
    RunTrace trace;
    initialize();
    trace.ladder.push_back(0.0);

    double lambda_prev = 0.0;
    double log_z = 0.0;
    int t = 1;
    int moved_steps = 0, move_phases = 0;
    while (lambda_prev < 1.0) {
      StepRecord rec;
      rec.t = t;
      try {
        if (t > 1) {
          move_phase(static_cast<std::uint64_t>(t), lambda_prev, rec);
          moved_steps += rec.move_steps;
          ++move_phases;
        }
        const double lambda = choose_lambda(t, lambda_prev);
        const auto rw = reweight(cloud_, lambda_prev, lambda);
        cloud_.log_weights = rw.log_weights;
        cloud_.resampled = false;
        log_z += rw.log_z_increment;
        rec.lambda = lambda;
        rec.log_z_increment = rw.log_z_increment;
        rec.log_z = log_z;
        rec.ess = ess(cloud_.log_weights);
        const bool trigger = cfg_.resample_trigger == ResampleTrigger::always ||
                             rec.ess < cfg_.resample_threshold * static_cast<double>(cfg_.n_particles);
        if (trigger) {
          Rng rng = make_stream(cfg_.seed, static_cast<std::uint64_t>(t), Phase::resample, 0);
          resample(cloud_, rng, cfg_.scheme);
          rec.resampled = true;
        }
        lambda_prev = lambda;
      } catch (const NumericalError& e) {
        throw NumericalError("step " + std::to_string(t) + ": " + e.what());
      }
      stamp_counts(rec);
      rec.wall_seconds = elapsed();
      trace.ladder.push_back(lambda_prev);
      trace.steps.push_back(std::move(rec));
      ++t;
    }
    trace.temperatures = t - 1;
    trace.mean_move_steps = move_phases > 0 ? static_cast<double>(moved_steps) / move_phases : 0.0;

    if (cfg_.final_moves) {
      StepRecord rec;
      rec.t = t;
      rec.phase = "final";
      rec.lambda = 1.0;
      try {
        move_phase(static_cast<std::uint64_t>(t), 1.0, rec);
      } catch (const NumericalError& e) {
        throw NumericalError("final moves: " + std::string(e.what()));
      }
      rec.log_z = log_z;
      rec.ess = ess(cloud_.log_weights);
      stamp_counts(rec);
      rec.wall_seconds = elapsed();
      trace.esjd_final = rec.esjd;
      trace.esjd_final_mahalanobis = rec.esjd_mahalanobis;
      trace.has_final_moves = true;
      trace.steps.push_back(std::move(rec));
    }

    const auto moments = weighted_moments(cloud_);
    trace.log_z = log_z;
    trace.mean = moments.mean;
    trace.variance = moments.variance;
    trace.final_ess = ess(cloud_.log_weights);
    const auto c = target_.counts();
    trace.likelihood_evals = c.likelihood;
    trace.gradient_evals = c.gradient;
    trace.final_cloud = cloud_;
    return trace;
  }

  const ParticleCloud& cloud() const { return cloud_; }

 private:
  void initialize() {
    const std::size_t n = cfg_.n_particles;
    const auto d = static_cast<Eigen::Index>(target_.dim());
    cloud_.positions.resize(static_cast<Eigen::Index>(n), d);
    cloud_.log_weights = Vec::Zero(static_cast<Eigen::Index>(n));
    cloud_.cached_loglik.resize(static_cast<Eigen::Index>(n));
    cloud_.cached_logprior.resize(static_cast<Eigen::Index>(n));
    parallel_for(n, cfg_.threads, [&](std::size_t i) {
      Rng rng = make_stream(cfg_.seed, 0, Phase::init, i);
      const Vec x = target_.sample_prior(rng);
      const auto parts = target_.evaluate(x);
      const auto ii = static_cast<Eigen::Index>(i);
      cloud_.positions.row(ii) = x.transpose();
      cloud_.cached_loglik[ii] = parts.log_likelihood;
      cloud_.cached_logprior[ii] = parts.log_prior;
    });
    cloud_.resampled = true;
    const bool hmc = cfg_.kernel == KernelKind::hmc;
    scale_star_ = hmc ? cfg_.tuning.eps_init_max : cfg_.tuning.scale_init_max;
    L_max_ = hmc ? cfg_.tuning.lmax_init : 1;
    population_ = {};
  }

  double choose_lambda(int t, double lambda_prev) const {
    if (cfg_.fixed_ladder) {
      const auto& l = *cfg_.fixed_ladder;
      return l[std::min(static_cast<std::size_t>(t), l.size() - 1)];
    }
    return next_temperature(cloud_.cached_loglik, lambda_prev, cfg_.alpha, cfg_.n_particles, cfg_.search);
  }

  void stamp_counts(StepRecord& rec) const {
    const auto c = target_.counts();
    rec.likelihood_evals = c.likelihood;
    rec.gradient_evals = c.gradient;
  }

  /// Chooses per-particle kernel parameters for this step.
  void tune(std::uint64_t t, double lambda, const MassMatrix& mass, StepRecord& rec) {
    const std::size_t n = cfg_.n_particles;
    const KernelKind kind = cfg_.kernel;
    const bool hmc = kind == KernelKind::hmc;
    switch (cfg_.tuner) {
      case TunerKind::fixed:
        population_.scale.assign(n, cfg_.fixed_scale);
        population_.steps.assign(n, hmc ? cfg_.fixed_leapfrog : 1);
        population_.scale_star = cfg_.fixed_scale;
        population_.L_max = hmc ? cfg_.fixed_leapfrog : 1;
        break;
      case TunerKind::ft:
        if (!population_.has_utilities()) {
          population_ = initial_population(
              kind, n, [&](std::size_t i) { return make_stream(cfg_.seed, t, Phase::tune_init, i); }, cfg_.tuning);
        } else {
          const double noise = cfg_.tuning.ft_noise_sd;
          population_ = ft_update(
              population_, [&](std::size_t i) { return make_stream(cfg_.seed, t, Phase::tune_select, i); },
              FtOptions{noise, hmc});
        }
        break;
      case TunerKind::pr: {
        auto explore = [&](std::uint64_t round, std::size_t i) {
          return make_stream(cfg_.seed, t, static_cast<std::uint64_t>(Phase::tune_explore), (round << 40) + i);
        };
        auto select = [&](std::size_t i) { return make_stream(cfg_.seed, t, Phase::tune_select, i); };
        auto res = pretune(kind, cloud_, lambda, target_, mass, scale_star_, L_max_, explore, select, cfg_.tuning,
                           cfg_.threads);
        scale_star_ = res.scale_star;
        L_max_ = res.L_max;
        population_ = std::move(res.population);
        rec.pretune_rounds = res.rounds;
        if (res.fit.update == StarUpdate::shrunk) rec.tune_note = "shrunk";
        if (res.fit.update == StarUpdate::grown) rec.tune_note = "grown";
        if (res.uniform_fallback) rec.tune_note += rec.tune_note.empty() ? "uniform" : "+uniform";
        break;
      }
    }
    rec.scale_q10 = quantile(population_.scale, 0.1);
    rec.scale_q50 = quantile(population_.scale, 0.5);
    rec.scale_q90 = quantile(population_.scale, 0.9);
    std::vector<double> L(population_.steps.begin(), population_.steps.end());
    rec.steps_q10 = quantile(L, 0.1);
    rec.steps_q50 = quantile(L, 0.5);
    rec.steps_q90 = quantile(L, 0.9);
    rec.scale_star = cfg_.tuner == TunerKind::pr ? scale_star_ : population_.scale_star;
    rec.L_max = cfg_.tuner == TunerKind::pr ? L_max_ : population_.L_max;
  }

  void move_phase(std::uint64_t t, double lambda, StepRecord& rec) {
    const std::size_t n = cfg_.n_particles;
    const MassMatrix mass = update_mass_matrix(cloud_);
    tune(t, lambda, mass, rec);

    std::vector<unsigned char> accepted(n);
    std::vector<unsigned char> diverged(n);
    std::vector<double> accept_prob(n), utility(n), jump(n), jump_m(n);
    double sum_acc = 0.0, sum_prob = 0.0, sum_jump = 0.0, sum_jump_m = 0.0;
    std::uint64_t divergences = 0;

    auto sweep = [&](int k, ParticleCloud& cloud) {
      parallel_for(n, cfg_.threads, [&](std::size_t i) {
        Rng rng = make_stream(cfg_.seed, t, Phase::move, i, static_cast<std::uint64_t>(k));
        const Vec x = cloud.position(i);
        const MoveOutcome o =
            kernel_step(cfg_.kernel, x, population_.scale[i], population_.steps[i], lambda, target_, mass, rng);
        const auto ii = static_cast<Eigen::Index>(i);
        const Vec delta = o.new_position - x;
        jump[i] = delta.squaredNorm();
        jump_m[i] = delta.cwiseAbs2().dot(mass.diag);
        accepted[i] = o.accepted ? 1 : 0;
        diverged[i] = o.diverged ? 1 : 0;
        accept_prob[i] = o.delta_E >= 0.0 ? 1.0 : std::exp(o.delta_E);
        utility[i] = wsjd_utility(x, o.proposal_position, population_.steps[i], o.delta_E, mass);
        if (o.accepted) {
          cloud.positions.row(ii) = o.new_position.transpose();
          cloud.cached_loglik[ii] = o.proposal.log_likelihood;
          cloud.cached_logprior[ii] = o.proposal.log_prior;
        }
      });
      for (std::size_t i = 0; i < n; ++i) {
        sum_acc += accepted[i];
        sum_prob += accept_prob[i];
        sum_jump += jump[i];
        sum_jump_m += jump_m[i];
        divergences += diverged[i];
      }
    };
    const MoveSummary summary = adaptive_move(cloud_, sweep, cfg_.move);
    population_.utility = utility;  // from the last sweep

    const double moves = static_cast<double>(n) * summary.steps;
    rec.move_steps = summary.steps;
    rec.hit_max_steps = summary.hit_max_steps;
    rec.accept_rate = sum_acc / moves;
    rec.accept_prob = sum_prob / moves;
    rec.esjd = sum_jump / moves;
    rec.esjd_mahalanobis = sum_jump_m / moves;
    rec.divergences = divergences;
  }

  SamplerConfig cfg_;
  TemperedTarget& target_;
  ParticleCloud cloud_;
  ParamPopulation population_;
  double scale_star_ = 0.1;
  int L_max_ = 100;
};

/// Runs the sampler once; the target's counters are reset first so the trace
/// reports this run's load only.
inline RunTrace run_sampler(const SamplerConfig& config, TemperedTarget& target) {
  target.reset_counts();
  Sampler sampler(config, target);
  return sampler.run();
}

}  // namespace smc
