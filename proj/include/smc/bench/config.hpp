#pragma once

#include "smc/engine/sampler.hpp"
#include "smc/errors.hpp"
#include "smc/io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace smc::bench {

using nlohmann::json;

struct ModelSpec {
  std::string name;                 // gaussian | mixture | student | logit | probit | lgcp
  std::size_t dim = 0;              // toys
  std::string data;                 // logit/probit CSV
  std::string label_column;
  std::optional<std::string> positive_label;
  std::optional<double> drop_correlated_above;
  std::string init = "laplace";     // logit/probit: laplace | prior
  std::size_t side = 0;             // lgcp
  std::string points;               // lgcp point file; empty = bundled synthetic pattern
};

enum class Variant { adaptive, fixed_ladder, fixed_moves };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::adaptive: return "adaptive";
    case Variant::fixed_ladder: return "fixed_ladder";
    case Variant::fixed_moves: return "fixed_moves";
  }
  return "?";
}

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<ModelSpec> models;
  std::vector<KernelKind> samplers;
  std::vector<TunerKind> tuners;
  std::vector<Variant> variants{Variant::adaptive};
  int repetitions = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "results";
  unsigned threads_per_run = 1;
  SamplerConfig sampler;  // seed, kernel and tuner are filled per run
};

namespace detail {

[[noreturn]] inline void field_error(const std::string& field, const std::string& msg) {
  throw ConfigError("config field '" + field + "': " + msg);
}

inline void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) field_error(where, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) field_error(where.empty() ? key : where + "." + key, "unknown field");
}

template <class T>
T get_number(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) field_error(path, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.get<long long>() < 0) field_error(path, "must be non-negative");
    }
    return v.get<T>();
  } else {
    if (!v.is_number()) field_error(path, "expected a number");
    return v.get<T>();
  }
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& path,
                              const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) field_error(path, "expected a string");
  return obj.at(key).get<std::string>();
}

inline bool get_bool(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) field_error(path, "expected true or false");
  return obj.at(key).get<bool>();
}

inline KernelKind parse_kernel(const std::string& s, const std::string& path) {
  if (s == "hmc") return KernelKind::hmc;
  if (s == "mala") return KernelKind::mala;
  if (s == "rw") return KernelKind::rw;
  field_error(path, "unknown sampler '" + s + "' (expected hmc, mala or rw)");
}

inline TunerKind parse_tuner(const std::string& s, const std::string& path) {
  if (s == "ft") return TunerKind::ft;
  if (s == "pr") return TunerKind::pr;
  if (s == "fixed") return TunerKind::fixed;
  field_error(path, "unknown tuner '" + s + "' (expected ft, pr or fixed)");
}

inline Variant parse_variant(const std::string& s, const std::string& path) {
  if (s == "adaptive") return Variant::adaptive;
  if (s == "fixed_ladder") return Variant::fixed_ladder;
  if (s == "fixed_moves") return Variant::fixed_moves;
  field_error(path, "unknown variant '" + s + "' (expected adaptive, fixed_ladder or fixed_moves)");
}

template <class F>
auto parse_list(const json& obj, const std::string& key, F&& parse) {
  using T = decltype(parse(std::string{}, std::string{}));
  std::vector<T> out;
  if (!obj.contains(key)) return out;
  const auto& arr = obj.at(key);
  if (!arr.is_array()) field_error(key, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = key + "[" + std::to_string(i) + "]";
    if (!arr[i].is_string()) field_error(path, "expected a string");
    out.push_back(parse(arr[i].get<std::string>(), path));
  }
  return out;
}

inline ModelSpec parse_model(const json& m, const std::string& path) {
  check_keys(m, path,
             {"name", "dim", "data", "label_column", "positive_label", "drop_correlated_above", "init", "side", "points"});
  ModelSpec spec;
  if (!m.contains("name")) field_error(path + ".name", "missing");
  spec.name = get_string(m, "name", path + ".name", "");
  spec.dim = get_number<std::size_t>(m, "dim", path + ".dim", 0);
  spec.data = get_string(m, "data", path + ".data", "");
  spec.label_column = get_string(m, "label_column", path + ".label_column", "");
  if (m.contains("positive_label")) spec.positive_label = get_string(m, "positive_label", path + ".positive_label", "");
  if (m.contains("drop_correlated_above"))
    spec.drop_correlated_above = get_number<double>(m, "drop_correlated_above", path + ".drop_correlated_above", 1.0);
  spec.init = get_string(m, "init", path + ".init", "laplace");
  spec.side = get_number<std::size_t>(m, "side", path + ".side", 0);
  spec.points = get_string(m, "points", path + ".points", "");

  if (spec.name == "gaussian" || spec.name == "student") {
    if (spec.dim < 2) field_error(path + ".dim", "must be >= 2 for model " + spec.name);
  } else if (spec.name == "mixture") {
    if (spec.dim < 1) field_error(path + ".dim", "must be >= 1 for model mixture");
  } else if (spec.name == "logit" || spec.name == "probit") {
    if (spec.data.empty()) field_error(path + ".data", "required for model " + spec.name);
    if (spec.label_column.empty()) field_error(path + ".label_column", "required for model " + spec.name);
    if (spec.init != "laplace" && spec.init != "prior") field_error(path + ".init", "expected laplace or prior");
    if (spec.drop_correlated_above && !(*spec.drop_correlated_above > 0.0 && *spec.drop_correlated_above <= 1.0))
      field_error(path + ".drop_correlated_above", "must be in (0,1]");
  } else if (spec.name == "lgcp") {
    if (spec.side < 2) field_error(path + ".side", "must be >= 2 for model lgcp");
  } else {
    field_error(path + ".name", "unknown model '" + spec.name + "'");
  }
  return spec;
}

inline void parse_tuning(const json& t, TuningConstants& c) {
  check_keys(t, "tuning",
             {"ft_noise_sd", "target_accept_hmc", "target_accept_mala", "target_accept_rw", "eps_init_max",
              "scale_init_max", "lmax_init", "lmax_step", "lmax_floor", "lmax_fraction", "lmax_high", "lmax_low",
              "pretune_max_rounds", "pretune_growth_trigger"});
  c.ft_noise_sd = get_number<double>(t, "ft_noise_sd", "tuning.ft_noise_sd", c.ft_noise_sd);
  c.target_accept_hmc = get_number<double>(t, "target_accept_hmc", "tuning.target_accept_hmc", c.target_accept_hmc);
  c.target_accept_mala = get_number<double>(t, "target_accept_mala", "tuning.target_accept_mala", c.target_accept_mala);
  c.target_accept_rw = get_number<double>(t, "target_accept_rw", "tuning.target_accept_rw", c.target_accept_rw);
  c.eps_init_max = get_number<double>(t, "eps_init_max", "tuning.eps_init_max", c.eps_init_max);
  c.scale_init_max = get_number<double>(t, "scale_init_max", "tuning.scale_init_max", c.scale_init_max);
  c.lmax_init = get_number<int>(t, "lmax_init", "tuning.lmax_init", c.lmax_init);
  c.lmax_step = get_number<int>(t, "lmax_step", "tuning.lmax_step", c.lmax_step);
  c.lmax_floor = get_number<int>(t, "lmax_floor", "tuning.lmax_floor", c.lmax_floor);
  c.lmax_fraction = get_number<double>(t, "lmax_fraction", "tuning.lmax_fraction", c.lmax_fraction);
  c.lmax_high = get_number<double>(t, "lmax_high", "tuning.lmax_high", c.lmax_high);
  c.lmax_low = get_number<double>(t, "lmax_low", "tuning.lmax_low", c.lmax_low);
  c.pretune_max_rounds = get_number<int>(t, "pretune_max_rounds", "tuning.pretune_max_rounds", c.pretune_max_rounds);
  c.pretune_growth_trigger =
      get_number<double>(t, "pretune_growth_trigger", "tuning.pretune_growth_trigger", c.pretune_growth_trigger);
  for (double a : {c.target_accept_hmc, c.target_accept_mala, c.target_accept_rw})
    if (!(a > 0.0 && a < 1.0)) field_error("tuning", "target acceptance rates must be in (0,1)");
  if (!(c.eps_init_max > 0.0)) field_error("tuning.eps_init_max", "must be > 0");
  if (!(c.scale_init_max > 0.0)) field_error("tuning.scale_init_max", "must be > 0");
  if (c.lmax_init < 1) field_error("tuning.lmax_init", "must be >= 1");
  if (c.lmax_step < 0) field_error("tuning.lmax_step", "must be >= 0");
  if (c.lmax_floor < 1) field_error("tuning.lmax_floor", "must be >= 1");
  if (c.pretune_max_rounds < 1) field_error("tuning.pretune_max_rounds", "must be >= 1");
  if (!(c.pretune_growth_trigger > 1.0)) field_error("tuning.pretune_growth_trigger", "must be > 1");
}

}  // namespace detail

/// Parses and validates an experiment config. Relative data paths are
/// resolved against `base_dir`.
inline ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  check_keys(j, "",
             {"name", "model", "models", "samplers", "tuners", "variants", "N", "repetitions", "seed", "output_dir",
              "alpha", "alpha_prime", "max_move_steps", "resample_trigger", "resample_threshold", "resampling",
              "fixed_ladder", "fixed_move_steps", "final_moves", "tuning", "fixed_params", "threads_per_run"});
  ExperimentConfig cfg;
  cfg.name = get_string(j, "name", "name", cfg.name);

  if (j.contains("model") && j.contains("models")) field_error("models", "give either 'model' or 'models', not both");
  if (j.contains("model")) {
    cfg.models.push_back(parse_model(j.at("model"), "model"));
  } else if (j.contains("models")) {
    const auto& arr = j.at("models");
    if (!arr.is_array()) field_error("models", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) cfg.models.push_back(parse_model(arr[i], "models[" + std::to_string(i) + "]"));
  }
  if (cfg.models.empty()) field_error("models", "at least one model is required");
  for (auto& m : cfg.models) {
    if (!m.data.empty() && std::filesystem::path(m.data).is_relative() && !base_dir.empty())
      m.data = (base_dir / m.data).string();
    if (!m.points.empty() && std::filesystem::path(m.points).is_relative() && !base_dir.empty())
      m.points = (base_dir / m.points).string();
  }

  if (!j.contains("samplers")) field_error("samplers", "missing");
  cfg.samplers = parse_list(j, "samplers", parse_kernel);
  if (cfg.samplers.empty()) field_error("samplers", "sampler list is empty");
  cfg.tuners = parse_list(j, "tuners", parse_tuner);
  if (!j.contains("tuners")) cfg.tuners = {TunerKind::pr};
  if (cfg.tuners.empty()) field_error("tuners", "tuner list is empty");
  if (j.contains("variants")) cfg.variants = parse_list(j, "variants", parse_variant);
  if (cfg.variants.empty()) field_error("variants", "variant list is empty");

  SamplerConfig& s = cfg.sampler;
  s.n_particles = get_number<std::size_t>(j, "N", "N", s.n_particles);
  cfg.repetitions = get_number<int>(j, "repetitions", "repetitions", cfg.repetitions);
  if (cfg.repetitions < 1) field_error("repetitions", "must be >= 1");
  cfg.seed = get_number<std::uint64_t>(j, "seed", "seed", cfg.seed);
  cfg.output_dir = get_string(j, "output_dir", "output_dir", cfg.output_dir);
  cfg.threads_per_run = get_number<unsigned>(j, "threads_per_run", "threads_per_run", cfg.threads_per_run);
  if (cfg.threads_per_run < 1) field_error("threads_per_run", "must be >= 1");

  s.alpha = get_number<double>(j, "alpha", "alpha", s.alpha);
  s.move.alpha_prime = get_number<double>(j, "alpha_prime", "alpha_prime", s.move.alpha_prime);
  s.move.max_steps = get_number<int>(j, "max_move_steps", "max_move_steps", s.move.max_steps);
  if (j.contains("fixed_move_steps")) s.move.fixed_steps = get_number<int>(j, "fixed_move_steps", "fixed_move_steps", 1);
  const std::string trig = get_string(j, "resample_trigger", "resample_trigger", "ess");
  if (trig == "ess")
    s.resample_trigger = ResampleTrigger::ess;
  else if (trig == "always")
    s.resample_trigger = ResampleTrigger::always;
  else
    field_error("resample_trigger", "expected ess or always");
  s.resample_threshold = get_number<double>(j, "resample_threshold", "resample_threshold", s.resample_threshold);
  const std::string scheme = get_string(j, "resampling", "resampling", "systematic");
  if (scheme == "systematic")
    s.scheme = ResamplingScheme::systematic;
  else if (scheme == "multinomial")
    s.scheme = ResamplingScheme::multinomial;
  else
    field_error("resampling", "expected systematic or multinomial");
  if (j.contains("fixed_ladder")) {
    const auto& l = j.at("fixed_ladder");
    if (!l.is_array()) field_error("fixed_ladder", "expected an array of numbers");
    std::vector<double> ladder;
    for (const auto& v : l) {
      if (!v.is_number()) field_error("fixed_ladder", "expected an array of numbers");
      ladder.push_back(v.get<double>());
    }
    s.fixed_ladder = ladder;
  }
  s.final_moves = get_bool(j, "final_moves", "final_moves", s.final_moves);
  if (j.contains("tuning")) parse_tuning(j.at("tuning"), s.tuning);
  if (j.contains("fixed_params")) {
    const auto& f = j.at("fixed_params");
    check_keys(f, "fixed_params", {"scale", "L"});
    s.fixed_scale = get_number<double>(f, "scale", "fixed_params.scale", s.fixed_scale);
    s.fixed_leapfrog = get_number<int>(f, "L", "fixed_params.L", s.fixed_leapfrog);
  }
  s.threads = cfg.threads_per_run;

  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (auto v : cfg.variants)
    if (v != Variant::adaptive && (s.fixed_ladder || s.move.fixed_steps))
      field_error("variants", "pilot-derived variants cannot be combined with fixed_ladder/fixed_move_steps");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IngestionError& e) {
    throw ConfigError(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_experiment_config(j, path.parent_path());
}

}  // namespace smc::bench
