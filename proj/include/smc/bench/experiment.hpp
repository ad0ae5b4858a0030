#pragma once

#include "smc/bench/config.hpp"
#include "smc/bench/metrics.hpp"
#include "smc/bench/models.hpp"
#include "smc/engine/sampler.hpp"
#include "smc/io.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace smc::bench {

struct CellSpec {
  std::size_t index = 0;
  std::size_t model = 0;  // index into the built models
  KernelKind kernel = KernelKind::hmc;
  TunerKind tuner = TunerKind::pr;
  Variant variant = Variant::adaptive;
  std::size_t pilot = 0;  // index of the (model, kernel, tuner) pilot slot
  std::string name;
};

struct RunRecord {
  std::size_t run_index = 0;
  std::string cell;
  std::string model;
  std::size_t dim = 0;
  std::string sampler;
  std::string tuner;
  std::string variant;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string error;
  double log_z = 0.0;
  double mean_1 = 0.0;
  double trace_variance = 0.0;
  double mode_proportion = 0.0;
  double esjd = 0.0;
  double esjd_mahalanobis = 0.0;
  int temperatures = 0;
  double mean_move_steps = 0.0;
  double accept_min = 0.0;
  double accept_mean = 0.0;
  double accept_max = 0.0;
  double final_ess = 0.0;
  std::uint64_t likelihood_evals = 0;
  std::uint64_t gradient_evals = 0;

  bool ok() const { return status == "ok"; }
  std::uint64_t load() const { return likelihood_evals + gradient_evals; }
};

inline const char* kRunsHeader =
    "run,cell,model,dim,sampler,tuner,variant,rep,seed,status,error,log_z,mean_1,trace_variance,mode_proportion,"
    "esjd,esjd_mahalanobis,temperatures,mean_move_steps,accept_min,accept_mean,accept_max,final_ess,"
    "likelihood_evals,gradient_evals,load";

/// Seed of run `run_index`; XOR with a fixed base is injective in the index.
inline std::uint64_t run_seed(std::uint64_t base, std::uint64_t run_index) { return base ^ run_index; }

inline std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

/// Accept-rate statistics over annealing steps that moved.
struct AcceptStats {
  double min = 0.0, mean = 0.0, max = 0.0;
};

inline AcceptStats accept_stats(const std::vector<StepRecord>& steps) {
  AcceptStats a;
  int n = 0;
  for (const auto& r : steps) {
    if (r.phase != "anneal" || r.move_steps == 0) continue;
    a.min = n == 0 ? r.accept_rate : std::min(a.min, r.accept_rate);
    a.max = n == 0 ? r.accept_rate : std::max(a.max, r.accept_rate);
    a.mean += r.accept_rate;
    ++n;
  }
  if (n > 0) a.mean /= n;
  return a;
}

inline double plain_sum(const Vec& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v[i];
  return s;
}

inline std::string run_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.run_index << ',' << r.cell << ',' << r.model << ',' << r.dim << ',' << r.sampler << ',' << r.tuner << ','
     << r.variant << ',' << r.rep << ',' << r.seed << ',' << r.status << ',' << csv_safe(r.error) << ',';
  if (r.ok()) {
    os << fmt_double(r.log_z) << ',' << fmt_double(r.mean_1) << ',' << fmt_double(r.trace_variance) << ','
       << fmt_double(r.mode_proportion) << ',' << fmt_double(r.esjd) << ',' << fmt_double(r.esjd_mahalanobis) << ','
       << r.temperatures << ',' << fmt_double(r.mean_move_steps) << ',' << fmt_double(r.accept_min) << ','
       << fmt_double(r.accept_mean) << ',' << fmt_double(r.accept_max) << ',' << fmt_double(r.final_ess) << ','
       << r.likelihood_evals << ',' << r.gradient_evals << ',' << r.load();
  } else {
    os << ",,,,,,,,,,,,,,";
  }
  return os.str();
}

inline std::string runs_to_csv(const std::vector<RunRecord>& runs) {
  std::string out = std::string(kRunsHeader) + "\n";
  for (const auto& r : runs) out += run_row(r) + "\n";
  return out;
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double to_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw IngestionError("not a number: '" + s + "'");
  return v;
}

inline std::uint64_t to_u64(const std::string& s) {
  char* end = nullptr;
  const auto v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw IngestionError("not an integer: '" + s + "'");
  return v;
}

/// Rows of a CSV file as header-keyed maps.
inline std::vector<std::map<std::string, std::string>> read_table(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(path.string() + ": empty file");
  const auto header = split_fields(line);
  std::vector<std::map<std::string, std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw IngestionError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields");
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = fields[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline RunRecord parse_run_row(const std::map<std::string, std::string>& row) {
  using namespace detail;
  RunRecord r;
  r.run_index = to_u64(row.at("run"));
  r.cell = row.at("cell");
  r.model = row.at("model");
  r.dim = to_u64(row.at("dim"));
  r.sampler = row.at("sampler");
  r.tuner = row.at("tuner");
  r.variant = row.at("variant");
  r.rep = static_cast<int>(to_u64(row.at("rep")));
  r.seed = to_u64(row.at("seed"));
  r.status = row.at("status");
  r.error = row.at("error");
  if (!r.ok()) return r;
  r.log_z = to_double(row.at("log_z"));
  r.mean_1 = to_double(row.at("mean_1"));
  r.trace_variance = to_double(row.at("trace_variance"));
  r.mode_proportion = to_double(row.at("mode_proportion"));
  r.esjd = to_double(row.at("esjd"));
  r.esjd_mahalanobis = to_double(row.at("esjd_mahalanobis"));
  r.temperatures = static_cast<int>(to_u64(row.at("temperatures")));
  r.mean_move_steps = to_double(row.at("mean_move_steps"));
  r.accept_min = to_double(row.at("accept_min"));
  r.accept_mean = to_double(row.at("accept_mean"));
  r.accept_max = to_double(row.at("accept_max"));
  r.final_ess = to_double(row.at("final_ess"));
  r.likelihood_evals = to_u64(row.at("likelihood_evals"));
  r.gradient_evals = to_u64(row.at("gradient_evals"));
  return r;
}

inline std::vector<RunRecord> read_runs(const std::filesystem::path& dir) {
  std::vector<RunRecord> out;
  for (const auto& row : detail::read_table(dir / "runs.csv")) out.push_back(parse_run_row(row));
  return out;
}

inline std::string trace_stem(const RunRecord& r) { return "trace_" + r.cell + "_" + std::to_string(r.rep); }

inline json trace_summary_json(const RunRecord& r, const RunTrace& trace, const json& extra) {
  json j;
  j["cell"] = r.cell;
  j["rep"] = r.rep;
  j["seed"] = r.seed;
  j["log_z"] = trace.log_z;
  j["mean"] = std::vector<double>(trace.mean.data(), trace.mean.data() + trace.mean.size());
  j["variance"] = std::vector<double>(trace.variance.data(), trace.variance.data() + trace.variance.size());
  j["mode_proportion"] = r.mode_proportion;
  j["final_ess"] = trace.final_ess;
  j["esjd"] = trace.esjd_final;
  j["esjd_mahalanobis"] = trace.esjd_final_mahalanobis;
  j["temperatures"] = trace.temperatures;
  j["mean_move_steps"] = trace.mean_move_steps;
  j["ladder"] = trace.ladder;
  j["likelihood_evals"] = trace.likelihood_evals;
  j["gradient_evals"] = trace.gradient_evals;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

// ---------------------------------------------------------------------------
// summary

inline std::string opt_field(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); }

inline KernelKind kernel_from_string(const std::string& s) {
  return s == "rw" ? KernelKind::rw : (s == "mala" ? KernelKind::mala : KernelKind::hmc);
}

struct CellSummary {
  std::string cell, model, sampler, tuner, variant;
  std::size_t dim = 0;
  std::size_t runs = 0, failed = 0;
  double mean_load = 0.0;
  Aggregate log_z, mean_1, trace_variance, mode_proportion;
  std::optional<double> trace_variance_truth, mode_proportion_truth;
  double esjd = 0.0, esjd_mahalanobis = 0.0, temperatures = 0.0, move_steps = 0.0, accept = 0.0;
};

inline std::vector<CellSummary> summarize(const std::vector<RunRecord>& runs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunRecord*>> groups;
  for (const auto& r : runs) {
    if (!groups.count(r.cell)) order.push_back(r.cell);
    groups[r.cell].push_back(&r);
  }
  std::vector<CellSummary> out;
  for (const auto& name : order) {
    const auto& g = groups[name];
    CellSummary s;
    const RunRecord& first = *g.front();
    s.cell = name;
    s.model = first.model;
    s.dim = first.dim;
    s.sampler = first.sampler;
    s.tuner = first.tuner;
    s.variant = first.variant;
    const std::string model_name = first.model.substr(0, first.model.find("-d"));
    Truth truth;
    try {
      truth = model_truth(model_name, first.dim);
    } catch (const ConfigError&) {
    }
    std::vector<double> lz, m1, tv, mp;
    double load = 0.0;
    for (const RunRecord* r : g) {
      if (!r->ok()) {
        ++s.failed;
        continue;
      }
      ++s.runs;
      lz.push_back(r->log_z);
      m1.push_back(r->mean_1);
      tv.push_back(r->trace_variance);
      mp.push_back(r->mode_proportion);
      load += adjustment_load(kernel_from_string(r->sampler), static_cast<double>(r->likelihood_evals),
                              static_cast<double>(r->gradient_evals));
      s.esjd += r->esjd;
      s.esjd_mahalanobis += r->esjd_mahalanobis;
      s.temperatures += r->temperatures;
      s.move_steps += r->mean_move_steps;
      s.accept += r->accept_mean;
    }
    if (s.runs > 0) {
      const double n = static_cast<double>(s.runs);
      s.mean_load = load / n;
      s.esjd /= n;
      s.esjd_mahalanobis /= n;
      s.temperatures /= n;
      s.move_steps /= n;
      s.accept /= n;
    }
    s.log_z = aggregate_metrics(lz, truth.log_z, s.mean_load);
    std::optional<double> mean1_truth;
    if (truth.mean) mean1_truth = (*truth.mean)[0];
    s.mean_1 = aggregate_metrics(m1, mean1_truth, s.mean_load);
    s.trace_variance = aggregate_metrics(tv, truth.trace_variance, s.mean_load);
    s.mode_proportion = aggregate_metrics(mp, truth.mode_proportion, s.mean_load);
    s.trace_variance_truth = truth.trace_variance;
    s.mode_proportion_truth = truth.mode_proportion;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::optional<double> safe_log(double v) {
  if (!(v > 0.0)) return std::nullopt;
  return std::log(v);
}

inline std::string summary_to_csv(const std::vector<CellSummary>& cells) {
  std::ostringstream os;
  os << "cell,model,dim,sampler,tuner,variant,runs,failed,mean_load,"
        "log_z_mean,log_z_var,log_z_mse,log_z_adj_var,log_z_adj_mse,log_z_log_adj_var,log_z_log_adj_mse,"
        "mean_1_mean,mean_1_var,mean_1_mse,mean_1_adj_var,mean_1_adj_mse,mean_1_log_adj_var,mean_1_log_adj_mse,"
        "trace_variance_mean,trace_variance_truth,mode_proportion_mean,mode_proportion_truth,"
        "esjd_mean,esjd_mahalanobis_mean,temperatures_mean,move_steps_mean,accept_mean\n";
  for (const auto& s : cells) {
    auto agg = [&](const Aggregate& a) {
      std::optional<double> log_adj_mse;
      if (a.adjusted_mse) log_adj_mse = safe_log(*a.adjusted_mse);
      os << fmt_double(a.mean) << ',' << (a.n >= 2 ? fmt_double(a.variance) : "") << ',' << opt_field(a.mse) << ','
         << (a.n >= 2 ? fmt_double(a.adjusted_variance) : "") << ',' << opt_field(a.adjusted_mse) << ','
         << (a.n >= 2 ? opt_field(safe_log(a.adjusted_variance)) : "") << ',' << opt_field(log_adj_mse);
    };
    os << s.cell << ',' << s.model << ',' << s.dim << ',' << s.sampler << ',' << s.tuner << ',' << s.variant << ','
       << s.runs << ',' << s.failed << ',' << fmt_double(s.mean_load) << ',';
    if (s.runs == 0) {
      os << ",,,,,,,,,,,,,,,,,,,,,,\n";
      continue;
    }
    agg(s.log_z);
    os << ',';
    agg(s.mean_1);
    os << ',' << fmt_double(s.trace_variance.mean) << ',' << opt_field(s.trace_variance_truth) << ','
       << fmt_double(s.mode_proportion.mean) << ',' << opt_field(s.mode_proportion_truth) << ','
       << fmt_double(s.esjd) << ',' << fmt_double(s.esjd_mahalanobis) << ',' << fmt_double(s.temperatures) << ','
       << fmt_double(s.move_steps) << ',' << fmt_double(s.accept) << '\n';
  }
  return os.str();
}

inline std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string summary_to_markdown(const std::vector<CellSummary>& cells) {
  std::ostringstream os;
  os << "| cell | runs | failed | mean load | log Z mean | log Z MSE | log adj. var (log Z) | mean_1 | mean_1 MSE | "
        "log adj. var (mean_1) | trace var | mode prop. | ESJD | ESJD (M) | temps | moves | accept |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  auto opt = [](const std::optional<double>& v) { return v ? short_num(*v) : std::string("-"); };
  for (const auto& s : cells) {
    os << "| " << s.cell << " | " << s.runs << " | " << s.failed << " | ";
    if (s.runs == 0) {
      os << "- | - | - | - | - | - | - | - | - | - | - | - | - | -|\n";
      continue;
    }
    const bool var_ok = s.log_z.n >= 2;
    os << short_num(s.mean_load) << " | " << short_num(s.log_z.mean) << " | " << opt(s.log_z.mse) << " | "
       << (var_ok ? opt(safe_log(s.log_z.adjusted_variance)) : "-") << " | " << short_num(s.mean_1.mean) << " | "
       << opt(s.mean_1.mse) << " | " << (var_ok ? opt(safe_log(s.mean_1.adjusted_variance)) : "-") << " | "
       << short_num(s.trace_variance.mean) << " | " << short_num(s.mode_proportion.mean) << " | " << short_num(s.esjd)
       << " | " << short_num(s.esjd_mahalanobis) << " | " << short_num(s.temperatures) << " | "
       << short_num(s.move_steps) << " | " << short_num(s.accept) << " |\n";
  }
  return os.str();
}

/// Recomputes summary.csv and summary.md from runs.csv in `dir`.
inline std::vector<CellSummary> report(const std::filesystem::path& dir) {
  const auto cells = summarize(read_runs(dir));
  write_file_atomic(dir / "summary.csv", summary_to_csv(cells));
  write_file_atomic(dir / "summary.md", summary_to_markdown(cells));
  return cells;
}

// ---------------------------------------------------------------------------
// experiment driver

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::size_t failed = 0;
};

inline std::vector<CellSpec> enumerate_cells(const ExperimentConfig& cfg, const std::vector<BuiltModel>& models) {
  std::vector<CellSpec> cells;
  std::size_t pilot = 0;
  for (std::size_t m = 0; m < cfg.models.size(); ++m)
    for (auto k : cfg.samplers)
      for (auto tu : cfg.tuners) {
        for (auto v : cfg.variants) {
          CellSpec c;
          c.index = cells.size();
          c.model = m;
          c.kernel = k;
          c.tuner = tu;
          c.variant = v;
          c.pilot = pilot;
          c.name = models[m].label + "_" + std::string(to_string(k)) + "_" + std::string(to_string(tu)) + "_" +
                   std::string(to_string(v));
          cells.push_back(std::move(c));
        }
        ++pilot;
      }
  return cells;
}

template <class Body>
void run_pool(std::size_t n, unsigned jobs, Body&& body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  if (jobs <= 1 || n < 2) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(jobs, n); ++w) pool.emplace_back(worker);
}

struct PilotInfo {
  bool ok = false;
  std::string error;
  int temperatures = 0;
  double mean_move_steps = 0.0;
};

/// Runs every (model, sampler, tuner, variant, repetition) cell and writes
/// runs.csv, trace files, summary.csv and summary.md to `output_dir`.
/// Non-adaptive variants take their ladder length or move count from one
/// adaptive pilot run of the same model/sampler/tuner.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& output_dir,
                                       unsigned jobs = 1) {
  std::vector<BuiltModel> models;
  for (const auto& spec : cfg.models) models.push_back(build_model(spec));
  const auto cells = enumerate_cells(cfg, models);
  const std::size_t reps = static_cast<std::size_t>(cfg.repetitions);
  const std::size_t total_runs = cells.size() * reps;

  auto sampler_config = [&](const CellSpec& c, std::uint64_t seed) {
    SamplerConfig s = cfg.sampler;
    s.kernel = c.kernel;
    s.tuner = c.tuner;
    s.seed = seed;
    s.threads = cfg.threads_per_run;
    s.record_wall_time = false;
    return s;
  };

  // pilots
  std::map<std::size_t, const CellSpec*> pilot_cells;
  for (const auto& c : cells)
    if (c.variant != Variant::adaptive && !pilot_cells.count(c.pilot)) pilot_cells[c.pilot] = &c;
  std::vector<std::size_t> pilot_ids;
  for (const auto& [id, _] : pilot_cells) pilot_ids.push_back(id);
  std::map<std::size_t, PilotInfo> pilots;
  for (auto id : pilot_ids) pilots[id] = {};
  run_pool(pilot_ids.size(), jobs, [&](std::size_t k) {
    const std::size_t id = pilot_ids[k];
    const CellSpec& c = *pilot_cells.at(id);
    PilotInfo info;
    try {
      TemperedTarget target(models[c.model].model);
      SamplerConfig s = sampler_config(c, run_seed(cfg.seed, total_runs + id));
      s.final_moves = false;
      const RunTrace tr = run_sampler(s, target);
      info.ok = true;
      info.temperatures = tr.temperatures;
      info.mean_move_steps = tr.mean_move_steps;
    } catch (const std::exception& e) {
      info.error = e.what();
    }
    pilots.at(id) = info;  // distinct keys, map structure unchanged
  });

  std::vector<RunRecord> runs(total_runs);
  std::filesystem::create_directories(output_dir);
  run_pool(total_runs, jobs, [&](std::size_t run) {
    const CellSpec& c = cells[run / reps];
    RunRecord r;
    r.run_index = run;
    r.cell = c.name;
    r.model = models[c.model].label;
    r.dim = models[c.model].model->dim();
    r.sampler = std::string(to_string(c.kernel));
    r.tuner = std::string(to_string(c.tuner));
    r.variant = std::string(to_string(c.variant));
    r.rep = static_cast<int>(run % reps);
    r.seed = run_seed(cfg.seed, run);
    try {
      SamplerConfig s = sampler_config(c, r.seed);
      json extra = json::object();
      if (c.variant != Variant::adaptive) {
        const PilotInfo& p = pilots.at(c.pilot);
        if (!p.ok) throw NumericalError("pilot run failed: " + p.error);
        if (c.variant == Variant::fixed_ladder) s.fixed_ladder = equispaced_ladder(std::max(1, p.temperatures));
        if (c.variant == Variant::fixed_moves)
          s.move.fixed_steps = std::max(1, static_cast<int>(std::lround(p.mean_move_steps)));
        extra["pilot_temperatures"] = p.temperatures;
        extra["pilot_mean_move_steps"] = p.mean_move_steps;
      }
      TemperedTarget target(models[c.model].model);
      const RunTrace tr = run_sampler(s, target);
      r.log_z = tr.log_z;
      r.mean_1 = tr.mean[0];
      r.trace_variance = plain_sum(tr.variance);
      r.mode_proportion = mode_proportion(tr.final_cloud);
      r.esjd = tr.esjd_final;
      r.esjd_mahalanobis = tr.esjd_final_mahalanobis;
      r.temperatures = tr.temperatures;
      r.mean_move_steps = tr.mean_move_steps;
      const auto acc = accept_stats(tr.steps);
      r.accept_min = acc.min;
      r.accept_mean = acc.mean;
      r.accept_max = acc.max;
      r.final_ess = tr.final_ess;
      r.likelihood_evals = tr.likelihood_evals;
      r.gradient_evals = tr.gradient_evals;
      write_file_atomic(output_dir / (trace_stem(r) + ".csv"), trace_to_csv(tr));
      write_file_atomic(output_dir / (trace_stem(r) + ".json"), trace_summary_json(r, tr, extra).dump(2) + "\n");
    } catch (const std::exception& e) {
      r.status = "failed";
      r.error = e.what();
    }
    runs[run] = std::move(r);
  });

  ExperimentResult out;
  for (const auto& r : runs)
    if (!r.ok()) ++out.failed;
  write_file_atomic(output_dir / "runs.csv", runs_to_csv(runs));
  report(output_dir);
  out.runs = std::move(runs);
  return out;
}

// ---------------------------------------------------------------------------
// verification

/// Checks that every metric in runs.csv and summary.csv is reproduced from
/// the per-run trace files. Returns a list of mismatches (empty when clean).
inline std::vector<std::string> verify(const std::filesystem::path& dir) {
  using detail::to_double;
  using detail::to_u64;
  std::vector<std::string> problems;
  const auto runs = read_runs(dir);
  auto mismatch = [&](const RunRecord& r, const std::string& what, const std::string& expected,
                      const std::string& got) {
    problems.push_back("run " + std::to_string(r.run_index) + " (" + r.cell + "): " + what + " is " + got +
                       " but traces give " + expected);
  };
  for (const auto& r : runs) {
    if (!r.ok()) continue;
    const auto stem = trace_stem(r);
    std::vector<std::map<std::string, std::string>> rows;
    json summary;
    try {
      rows = detail::read_table(dir / (stem + ".csv"));
      summary = json::parse(read_file(dir / (stem + ".json")));
    } catch (const std::exception& e) {
      problems.push_back("run " + std::to_string(r.run_index) + ": " + e.what());
      continue;
    }
    if (rows.empty()) {
      problems.push_back("run " + std::to_string(r.run_index) + ": empty trace");
      continue;
    }
    double log_z = 0.0;
    int temps = 0;
    std::vector<StepRecord> steps;
    for (const auto& row : rows) {
      StepRecord s;
      s.phase = row.at("phase");
      s.move_steps = static_cast<int>(to_u64(row.at("move_steps")));
      s.accept_rate = to_double(row.at("accept_rate"));
      steps.push_back(s);
      if (s.phase == "anneal") {
        log_z += to_double(row.at("log_z_increment"));
        ++temps;
      }
    }
    const auto& last = rows.back();
    const auto acc = accept_stats(steps);
    auto check = [&](const std::string& what, const std::string& expected, const std::string& got) {
      if (expected != got) mismatch(r, what, expected, got);
    };
    check("log_z", fmt_double(log_z), fmt_double(r.log_z));
    check("temperatures", std::to_string(temps), std::to_string(r.temperatures));
    check("likelihood_evals", last.at("likelihood_evals"), std::to_string(r.likelihood_evals));
    check("gradient_evals", last.at("gradient_evals"), std::to_string(r.gradient_evals));
    check("accept_min", fmt_double(acc.min), fmt_double(r.accept_min));
    check("accept_mean", fmt_double(acc.mean), fmt_double(r.accept_mean));
    check("accept_max", fmt_double(acc.max), fmt_double(r.accept_max));
    if (last.at("phase") == "final") {
      check("esjd", last.at("esjd"), fmt_double(r.esjd));
      check("esjd_mahalanobis", last.at("esjd_mahalanobis"), fmt_double(r.esjd_mahalanobis));
    }
    const auto mean = summary.at("mean").get<std::vector<double>>();
    const auto var = summary.at("variance").get<std::vector<double>>();
    double tv = 0.0;
    for (double v : var) tv += v;
    check("mean_1", mean.empty() ? "" : fmt_double(mean[0]), fmt_double(r.mean_1));
    check("trace_variance", fmt_double(tv), fmt_double(r.trace_variance));
    check("mode_proportion", fmt_double(summary.at("mode_proportion").get<double>()), fmt_double(r.mode_proportion));
    check("final_ess", fmt_double(summary.at("final_ess").get<double>()), fmt_double(r.final_ess));
  }
  try {
    const std::string expected = summary_to_csv(summarize(runs));
    if (read_file(dir / "summary.csv") != expected) problems.push_back("summary.csv differs from runs.csv aggregation");
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }
  return problems;
}

}  // namespace smc::bench
