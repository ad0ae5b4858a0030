// Command-line front end for the benchmark harness.

#include "smc/bench/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace {

int cmd_run(const std::string& config_path, unsigned jobs, const std::string& output_override) {
  const auto cfg = smc::bench::load_experiment_config(config_path);
  std::filesystem::path out = cfg.output_dir;
  if (const char* env = std::getenv("SMC_OUTPUT_DIR"); env && *env) out = env;
  if (!output_override.empty()) out = output_override;
  const auto result = smc::bench::run_experiment(cfg, out, jobs);
  std::cout << "wrote " << result.runs.size() << " runs to " << out.string() << "\n";
  if (result.failed > 0) {
    for (const auto& r : result.runs)
      if (!r.ok()) std::cerr << "run " << r.run_index << " (" << r.cell << ") failed: " << r.error << "\n";
    return 2;
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  const auto cfg = smc::bench::load_experiment_config(config_path);
  const std::size_t cells = cfg.models.size() * cfg.samplers.size() * cfg.tuners.size() * cfg.variants.size();
  std::cout << "ok: " << cells << " cells x " << cfg.repetitions << " repetitions\n";
  return 0;
}

int cmd_truths(const std::string& model, std::size_t dim) {
  const auto truth = smc::bench::model_truth(model, dim);
  std::cout << "model " << model << "\ndim " << dim << "\n";
  if (!truth.log_z && !truth.mean) {
    std::cout << "no closed-form reference values for this model\n";
    return 0;
  }
  if (truth.log_z) std::cout << "log_z " << smc::fmt_double(*truth.log_z) << "\n";
  if (truth.mean) {
    std::cout << "mean";
    for (Eigen::Index j = 0; j < truth.mean->size(); ++j) std::cout << ' ' << smc::fmt_double((*truth.mean)[j]);
    std::cout << "\n";
  }
  if (truth.trace_variance) std::cout << "trace_variance " << smc::fmt_double(*truth.trace_variance) << "\n";
  if (truth.mode_proportion) std::cout << "mode_proportion " << smc::fmt_double(*truth.mode_proportion) << "\n";
  return 0;
}

int cmd_report(const std::string& dir) {
  const auto cells = smc::bench::report(dir);
  std::cout << smc::bench::summary_to_markdown(cells);
  return 0;
}

int cmd_verify(const std::string& dir) {
  const auto problems = smc::bench::verify(dir);
  for (const auto& p : problems) std::cerr << p << "\n";
  if (!problems.empty()) return 2;
  std::cout << "ok: all metrics reproduced from trace files\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive tempered SMC benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, dir, model, output;
  std::size_t dim = 0;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "Run an experiment grid from a JSON config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("-j,--jobs", jobs, "Number of runs executed concurrently")->check(CLI::PositiveNumber);
  run->add_option("-o,--output", output, "Output directory (overrides SMC_OUTPUT_DIR and the config)");

  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required();

  auto* truths = app.add_subcommand("truths", "Print reference values for a model");
  truths->add_option("model", model, "gaussian, mixture, student, logit, probit or lgcp")->required();
  truths->add_option("dim", dim, "Dimension")->required();

  auto* rep = app.add_subcommand("report", "Aggregate runs.csv into summary.csv and summary.md");
  rep->add_option("dir", dir, "Output directory of a run")->required();

  auto* ver = app.add_subcommand("verify", "Recompute every reported metric from the trace files");
  ver->add_option("dir", dir, "Output directory of a run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, jobs, output);
    if (validate->parsed()) return cmd_validate(config_path);
    if (truths->parsed()) return cmd_truths(model, dim);
    if (rep->parsed()) return cmd_report(dir);
    if (ver->parsed()) return cmd_verify(dir);
  } catch (const smc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << app.help();
  return 1;
}
