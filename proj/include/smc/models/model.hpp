#pragma once

#include "smc/errors.hpp"
#include "smc/linalg.hpp"
#include "smc/rng.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

namespace smc {

/// A prior/likelihood pair. Implementations are immutable after construction
/// and must be safe to evaluate concurrently.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;

  virtual double log_prior(const Vec& x) const = 0;
  virtual double log_likelihood(const Vec& x) const = 0;
  virtual Vec grad_log_prior(const Vec& x) const = 0;
  virtual Vec grad_log_likelihood(const Vec& x) const = 0;

  /// One draw from the prior.
  virtual Vec sample_prior(Rng& rng) const = 0;

  /// n draws from the prior, one per row.
  RowMat sample_prior(Rng& rng, std::size_t n) const {
    RowMat out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim()));
    for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = sample_prior(rng).transpose();
    return out;
  }
};

using ModelPtr = std::shared_ptr<const Model>;

struct DensityParts {
  double log_prior = 0.0;
  double log_likelihood = 0.0;

  double tempered(double lambda) const { return log_prior + lambda * log_likelihood; }
};

struct EvalCounts {
  std::uint64_t likelihood = 0;
  std::uint64_t gradient = 0;
};

/// Counting front end over a Model: exposes log p(x) + lambda * log l(y|x) and
/// its gradient. Every density call bumps the likelihood counter by one and
/// every gradient call bumps the gradient counter by one.
class TemperedTarget {
 public:
  explicit TemperedTarget(ModelPtr model) : model_(std::move(model)) {
    if (!model_) throw ConfigError("TemperedTarget: null model");
  }

  TemperedTarget(const TemperedTarget&) = delete;
  TemperedTarget& operator=(const TemperedTarget&) = delete;

  std::size_t dim() const { return model_->dim(); }
  const Model& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }

  DensityParts evaluate(const Vec& x) const {
    check(x);
    likelihood_count_.fetch_add(1, std::memory_order_relaxed);
    return {model_->log_prior(x), model_->log_likelihood(x)};
  }

  double tempered_logpdf(const Vec& x, double lambda) const { return evaluate(x).tempered(lambda); }

  double log_likelihood(const Vec& x) const {
    check(x);
    likelihood_count_.fetch_add(1, std::memory_order_relaxed);
    return model_->log_likelihood(x);
  }

  Vec tempered_grad(const Vec& x, double lambda) const {
    check(x);
    gradient_count_.fetch_add(1, std::memory_order_relaxed);
    if (lambda == 0.0) return model_->grad_log_prior(x);
    return model_->grad_log_prior(x) + lambda * model_->grad_log_likelihood(x);
  }

  Vec sample_prior(Rng& rng) const { return model_->sample_prior(rng); }

  EvalCounts counts() const {
    return {likelihood_count_.load(std::memory_order_relaxed),
            gradient_count_.load(std::memory_order_relaxed)};
  }

  void reset_counts() {
    likelihood_count_.store(0);
    gradient_count_.store(0);
  }

 private:
  static void check(const Vec& x) {
    if (!x.allFinite()) throw NumericalError("invalid state");
  }

  ModelPtr model_;
  mutable std::atomic<std::uint64_t> likelihood_count_{0};
  mutable std::atomic<std::uint64_t> gradient_count_{0};
};

}  // namespace smc
