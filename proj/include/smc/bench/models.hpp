#pragma once

#include "smc/bench/config.hpp"
#include "smc/models/binary.hpp"
#include "smc/models/laplace.hpp"
#include "smc/models/lgcp.hpp"
#include "smc/models/toys.hpp"

#include <optional>
#include <string>

namespace smc::bench {

/// Reference values for a model; absent fields have no known ground truth.
struct Truth {
  std::optional<double> log_z;
  std::optional<Vec> mean;
  std::optional<double> trace_variance;
  std::optional<double> mode_proportion;
};

struct BuiltModel {
  ModelPtr model;
  std::string label;  // e.g. "gaussian-d10"
  Truth truth;
};

inline Truth model_truth(const std::string& name, std::size_t dim) {
  Truth t;
  if (name == "gaussian") {
    const auto m = build_gaussian_shift_model(dim);
    t.log_z = 0.0;
    t.mean = m->target().mean();
    t.trace_variance = m->target().cov().trace();
  } else if (name == "mixture") {
    const auto m = build_mixture_model(dim);
    t.log_z = 0.0;
    t.mean = m->exact_mean();
    t.trace_variance = m->exact_variance().sum();
    t.mode_proportion = m->exact_mode_proportion();
  } else if (name == "student") {
    const auto m = build_student_model(dim);
    t.log_z = 0.0;
    t.mean = m->exact_mean();
    t.trace_variance = m->exact_variance().sum();
  } else if (name != "logit" && name != "probit" && name != "lgcp") {
    throw ConfigError("unknown model '" + name + "'");
  }
  return t;
}

inline BuiltModel build_model(const ModelSpec& spec) {
  BuiltModel out;
  if (spec.name == "gaussian") {
    out.model = build_gaussian_shift_model(spec.dim);
  } else if (spec.name == "mixture") {
    out.model = build_mixture_model(spec.dim);
  } else if (spec.name == "student") {
    out.model = build_student_model(spec.dim);
  } else if (spec.name == "logit" || spec.name == "probit") {
    BinaryLoadOptions opt;
    opt.label_column = spec.label_column;
    opt.positive_label = spec.positive_label;
    opt.drop_correlated_above = spec.drop_correlated_above;
    BinaryDataset data = load_binary_dataset(spec.data, opt);
    ModelPtr base = spec.name == "logit" ? ModelPtr(build_logit_model(std::move(data)))
                                         : ModelPtr(build_probit_model(std::move(data)));
    out.model = spec.init == "laplace" ? ModelPtr(with_laplace_reference(base)) : base;
  } else if (spec.name == "lgcp") {
    const auto points = spec.points.empty() ? synthetic_lgcp_points() : load_point_pattern(spec.points);
    out.model = build_lgcp_model(spec.side, bin_points(points, spec.side));
  } else {
    throw ConfigError("unknown model '" + spec.name + "'");
  }
  out.label = spec.name + "-d" + std::to_string(out.model->dim());
  out.truth = model_truth(spec.name, out.model->dim());
  return out;
}

}  // namespace smc::bench
