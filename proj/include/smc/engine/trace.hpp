#pragma once

#include "smc/io.hpp"
#include "smc/linalg.hpp"
#include "smc/engine/particles.hpp"

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace smc {

/// One temperature step. The final-moves row (phase "final") has lambda = 1
/// and a zero log-Z increment.
struct StepRecord {
  int t = 0;
  std::string phase = "anneal";
  double lambda = 0.0;
  double ess = 0.0;
  bool resampled = false;
  int move_steps = 0;
  bool hit_max_steps = false;
  double accept_rate = 0.0;       // realized, over all sweeps
  double accept_prob = 0.0;       // mean min(1, exp(delta_E))
  std::uint64_t divergences = 0;
  double log_z_increment = 0.0;
  double log_z = 0.0;
  std::uint64_t likelihood_evals = 0;  // cumulative
  std::uint64_t gradient_evals = 0;    // cumulative
  double scale_q10 = 0.0, scale_q50 = 0.0, scale_q90 = 0.0;
  double steps_q10 = 0.0, steps_q50 = 0.0, steps_q90 = 0.0;
  double scale_star = 0.0;
  int L_max = 0;
  int pretune_rounds = 0;
  std::string tune_note;
  double esjd = 0.0;              // mean squared jump per particle per sweep
  double esjd_mahalanobis = 0.0;
  double wall_seconds = 0.0;
};

struct RunTrace {
  std::vector<StepRecord> steps;
  double log_z = 0.0;
  Vec mean;
  Vec variance;
  double final_ess = 0.0;
  double esjd_final = 0.0;
  double esjd_final_mahalanobis = 0.0;
  bool has_final_moves = false;
  std::uint64_t likelihood_evals = 0;
  std::uint64_t gradient_evals = 0;
  int temperatures = 0;             // number of annealing steps (lambda_1 .. lambda_T)
  double mean_move_steps = 0.0;     // over annealing steps that moved
  std::vector<double> ladder;       // 0, lambda_1, ..., 1
  ParticleCloud final_cloud;

  double trace_variance() const { return variance.sum(); }
  std::uint64_t load() const { return likelihood_evals + gradient_evals; }
};

inline const char* kTraceHeader =
    "t,phase,lambda,ess,resampled,move_steps,hit_max_steps,accept_rate,accept_prob,divergences,"
    "log_z_increment,log_z,likelihood_evals,gradient_evals,scale_q10,scale_q50,scale_q90,"
    "steps_q10,steps_q50,steps_q90,scale_star,L_max,pretune_rounds,tune_note,esjd,esjd_mahalanobis,wall_seconds";

inline std::string trace_to_csv(const RunTrace& trace) {
  std::ostringstream os;
  os << kTraceHeader << '\n';
  for (const auto& r : trace.steps) {
    os << r.t << ',' << r.phase << ',' << fmt_double(r.lambda) << ',' << fmt_double(r.ess) << ','
       << (r.resampled ? 1 : 0) << ',' << r.move_steps << ',' << (r.hit_max_steps ? 1 : 0) << ','
       << fmt_double(r.accept_rate) << ',' << fmt_double(r.accept_prob) << ',' << r.divergences << ','
       << fmt_double(r.log_z_increment) << ',' << fmt_double(r.log_z) << ',' << r.likelihood_evals << ','
       << r.gradient_evals << ',' << fmt_double(r.scale_q10) << ',' << fmt_double(r.scale_q50) << ','
       << fmt_double(r.scale_q90) << ',' << fmt_double(r.steps_q10) << ',' << fmt_double(r.steps_q50) << ','
       << fmt_double(r.steps_q90) << ',' << fmt_double(r.scale_star) << ',' << r.L_max << ',' << r.pretune_rounds
       << ',' << r.tune_note << ',' << fmt_double(r.esjd) << ',' << fmt_double(r.esjd_mahalanobis) << ','
       << fmt_double(r.wall_seconds) << '\n';
  }
  return os.str();
}

}  // namespace smc
