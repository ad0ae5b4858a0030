#include "test_util.hpp"

#include "smc/bench/experiment.hpp"

#include <cstdlib>
#include <set>

using namespace smc;
using namespace smc::bench;
using namespace smc::test;
using nlohmann::json;

namespace {

json small_grid() {
  return json::parse(R"({
    "name": "grid",
    "models": [{"name": "gaussian", "dim": 3}, {"name": "mixture", "dim": 2}],
    "samplers": ["hmc", "rw"],
    "tuners": ["pr", "ft"],
    "N": 64,
    "repetitions": 2,
    "seed": 11
  })");
}

std::string slurp(const std::filesystem::path& p) { return read_file(p); }

std::string config_error(const json& j) {
  try {
    parse_experiment_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string(SMC_BENCH_EXE) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesGridAndDefaults) {
  const auto cfg = parse_experiment_config(small_grid());
  EXPECT_EQ(cfg.models.size(), 2u);
  EXPECT_EQ(cfg.samplers, (std::vector<KernelKind>{KernelKind::hmc, KernelKind::rw}));
  EXPECT_EQ(cfg.sampler.n_particles, 64u);
  EXPECT_EQ(cfg.sampler.alpha, 0.9);
  EXPECT_EQ(cfg.repetitions, 2);
  EXPECT_EQ(cfg.variants, (std::vector<Variant>{Variant::adaptive}));
}

TEST(Config, EmptySamplerListIsAnError) {
  auto j = small_grid();
  j["samplers"] = json::array();
  EXPECT_NE(config_error(j).find("samplers"), std::string::npos);
}

TEST(Config, FieldLevelMessages) {
  auto j = small_grid();
  j["bogus"] = 1;
  EXPECT_NE(config_error(j).find("bogus"), std::string::npos);

  j = small_grid();
  j["N"] = "many";
  EXPECT_NE(config_error(j).find("'N'"), std::string::npos);

  j = small_grid();
  j["models"][0]["dim"] = 1;
  EXPECT_NE(config_error(j).find("models[0].dim"), std::string::npos);

  j = small_grid();
  j["models"][1] = {{"name", "logit"}};
  EXPECT_NE(config_error(j).find("models[1].data"), std::string::npos);

  j = small_grid();
  j["samplers"] = {"nuts"};
  EXPECT_NE(config_error(j).find("samplers"), std::string::npos);

  j = small_grid();
  j["alpha"] = 1.5;
  EXPECT_FALSE(config_error(j).empty());

  j = small_grid();
  j["variants"] = {"fixed_ladder"};
  j["fixed_ladder"] = {0.0, 0.5, 1.0};
  EXPECT_NE(config_error(j).find("variants"), std::string::npos);
}

TEST(Config, RelativePathsResolveAgainstConfigDirectory) {
  const json j = json::parse(R"({"model": {"name": "logit", "data": "d.csv", "label_column": "y"}, "samplers": ["hmc"]})");
  const auto cfg = parse_experiment_config(j, "/some/where");
  EXPECT_EQ(cfg.models[0].data, "/some/where/d.csv");
}

TEST(Seeds, InjectiveOverLargeGrids) {
  for (std::uint64_t base : {0ull, 1ull, 12345ull, 0xdeadbeefull}) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(run_seed(base, i));
    EXPECT_EQ(seen.size(), 10000u);
  }
}

TEST(Metrics, ModeProportion) {
  ParticleCloud c;
  c.positions = RowMat::Constant(10, 4, 1.0);
  c.log_weights = Vec::Zero(10);
  EXPECT_NEAR(mode_proportion(c), 1.0, 1e-12);
  c.positions.setConstant(-1.0);
  EXPECT_NEAR(mode_proportion(c), 0.0, 1e-12);
  c.positions.col(0).setConstant(2.0);
  EXPECT_NEAR(mode_proportion(c), 0.25, 1e-15);
}

TEST(Metrics, EsjdFinal) {
  const RowMat x = RowMat::Random(50, 3);
  EXPECT_EQ(esjd_final({x, x, x}), 0.0);
  EXPECT_THROW(esjd_final({x}), ConfigError);

  Rng rng(1);
  const int n = 100000;
  RowMat a(n, 1), b(n, 1);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = standard_normal(rng, 1)[0];
    b(i, 0) = standard_normal(rng, 1)[0];
  }
  // E (X - Y)^2 = 2 with sd sqrt(8)
  EXPECT_NEAR(esjd_final({a, b}), 2.0, 4.0 * std::sqrt(8.0 / n));
  EXPECT_NEAR(esjd_final({a, b}, MassMatrix::from_variance(Vec::Constant(1, 4.0))), esjd_final({a, b}) / 4.0, 1e-12);
}

TEST(Metrics, Aggregates) {
  const auto same = aggregate_metrics({0.3, 0.3}, 0.3, 10.0);
  EXPECT_EQ(same.variance, 0.0);
  EXPECT_EQ(*same.mse, 0.0);
  const auto a = aggregate_metrics({-0.1, 0.1}, 0.0, 100.0);
  EXPECT_NEAR(*a.mse, 0.01, 1e-15);
  EXPECT_NEAR(a.variance, 0.02, 1e-15);
  EXPECT_NEAR(*a.adjusted_mse, 1.0, 1e-12);
  const auto none = aggregate_metrics({1.0, 2.0, 3.0}, std::nullopt, 1.0);
  EXPECT_FALSE(none.mse.has_value());
  EXPECT_NEAR(none.variance, 1.0, 1e-15);
  EXPECT_EQ(adjustment_load(KernelKind::rw, 10, 5), 10);
  EXPECT_EQ(adjustment_load(KernelKind::hmc, 10, 5), 15);
}

TEST(Truths, ClosedFormValues) {
  const auto g = model_truth("gaussian", 10);
  EXPECT_EQ(*g.log_z, 0.0);
  EXPECT_EQ(*g.mean, Vec::Constant(10, 2.0));
  EXPECT_NEAR(*g.trace_variance, 50.5, 1e-12);
  EXPECT_NEAR(*model_truth("mixture", 5).mode_proportion, 0.3, 0.005);
  EXPECT_FALSE(model_truth("lgcp", 100).log_z.has_value());
  EXPECT_THROW(model_truth("nope", 3), ConfigError);
}

class ExperimentTest : public ::testing::Test {
 protected:
  std::filesystem::path dir = temp_dir("experiment");
};

TEST_F(ExperimentTest, RunIsDeterministicAndVerifiable) {
  const auto cfg = parse_experiment_config(small_grid());
  const auto result = run_experiment(cfg, dir / "a", 1);
  EXPECT_EQ(result.failed, 0u);
  ASSERT_EQ(result.runs.size(), 2u * 2u * 2u * 2u);

  std::set<std::uint64_t> seeds;
  for (const auto& r : result.runs) {
    seeds.insert(r.seed);
    EXPECT_TRUE(std::filesystem::exists(dir / "a" / (trace_stem(r) + ".csv")));
    EXPECT_EQ(r.load(), r.likelihood_evals + r.gradient_evals);
  }
  EXPECT_EQ(seeds.size(), result.runs.size());
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "summary.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "summary.md"));
  EXPECT_TRUE(verify(dir / "a").empty());

  run_experiment(cfg, dir / "b", 1);
  run_experiment(cfg, dir / "c", 3);
  EXPECT_EQ(slurp(dir / "a" / "runs.csv"), slurp(dir / "b" / "runs.csv"));
  EXPECT_EQ(slurp(dir / "a" / "runs.csv"), slurp(dir / "c" / "runs.csv"));
  EXPECT_EQ(slurp(dir / "a" / "summary.csv"), slurp(dir / "c" / "summary.csv"));
}

TEST_F(ExperimentTest, VerifyDetectsTampering) {
  const auto cfg = parse_experiment_config(small_grid());
  run_experiment(cfg, dir, 1);
  std::string runs = slurp(dir / "runs.csv");
  const auto row = runs.find('\n') + 1;
  // corrupt the log_z field of the first run
  auto fields = bench::detail::split_fields(runs.substr(row, runs.find('\n', row) - row));
  const auto header = bench::detail::split_fields(runs.substr(0, row - 1));
  const auto col = static_cast<std::size_t>(std::find(header.begin(), header.end(), "log_z") - header.begin());
  ASSERT_LT(col, header.size());
  fields[col] = "123.5";
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + fields[i];
  runs.replace(row, runs.find('\n', row) - row, line);
  write_text(dir / "runs.csv", runs);
  const auto problems = verify(dir);
  ASSERT_FALSE(problems.empty());
  EXPECT_NE(problems.front().find("log_z"), std::string::npos);
}

TEST_F(ExperimentTest, PilotDerivedVariants) {
  json j = json::parse(R"({
    "model": {"name": "gaussian", "dim": 2},
    "samplers": ["hmc"],
    "variants": ["adaptive", "fixed_ladder", "fixed_moves"],
    "N": 64,
    "seed": 5
  })");
  const auto result = run_experiment(parse_experiment_config(j), dir, 1);
  ASSERT_EQ(result.failed, 0u);
  ASSERT_EQ(result.runs.size(), 3u);
  const auto meta = json::parse(slurp(dir / (trace_stem(result.runs[1]) + ".json")));
  const int pilot_t = meta.at("pilot_temperatures").get<int>();
  EXPECT_EQ(result.runs[1].temperatures, pilot_t);
  const auto trace = bench::detail::read_table(dir / (trace_stem(result.runs[1]) + ".csv"));
  for (std::size_t k = 0; k < static_cast<std::size_t>(pilot_t); ++k)
    EXPECT_NEAR(std::stod(trace[k].at("lambda")), static_cast<double>(k + 1) / pilot_t, 1e-12);
  const auto moves = bench::detail::read_table(dir / (trace_stem(result.runs[2]) + ".csv"));
  const int fixed = std::max(1, static_cast<int>(std::lround(
                                    json::parse(slurp(dir / (trace_stem(result.runs[2]) + ".json")))
                                        .at("pilot_mean_move_steps")
                                        .get<double>())));
  for (const auto& row : moves)
    if (row.at("phase") == "anneal" && row.at("t") != "1") {
      EXPECT_EQ(std::stoi(row.at("move_steps")), fixed);
    }
  EXPECT_TRUE(verify(dir).empty());
}

TEST_F(ExperimentTest, UnbuildableModelIsAConfigError) {
  const auto pts = dir / "empty_points.csv";
  write_text(pts, "x,y\n");
  json j = json::parse(R"({"model": {"name": "lgcp", "side": 2}, "samplers": ["rw"], "N": 16})");
  j["model"]["points"] = pts.string();
  EXPECT_THROW(run_experiment(parse_experiment_config(j), dir / "out", 1), ConfigError);
}

class CliTest : public ::testing::Test {
 protected:
  std::filesystem::path dir = temp_dir("cli");
  std::filesystem::path log = dir / "log.txt";
};

TEST_F(CliTest, UnknownSubcommandExitsOne) {
  EXPECT_EQ(run_cli("frobnicate", log), 1);
  EXPECT_NE(slurp(log).find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli("", log), 1);
}

TEST_F(CliTest, ValidateMalformedConfigExitsOne) {
  write_text(dir / "bad.json", R"({"model": {"name": "gaussian", "dim": 0}, "samplers": ["hmc"]})");
  EXPECT_EQ(run_cli("validate " + (dir / "bad.json").string(), log), 1);
  EXPECT_NE(slurp(log).find("model.dim"), std::string::npos);
  write_text(dir / "broken.json", "{ not json");
  EXPECT_EQ(run_cli("validate " + (dir / "broken.json").string(), log), 1);
  EXPECT_EQ(run_cli("validate " + (dir / "missing.json").string(), log), 1);
}

TEST_F(CliTest, TruthsGaussian) {
  EXPECT_EQ(run_cli("truths gaussian 10", log), 0);
  const auto out = slurp(log);
  EXPECT_NE(out.find("log_z 0\n"), std::string::npos);
  EXPECT_NE(out.find("mean 2 2 2 2 2 2 2 2 2 2\n"), std::string::npos);
}

TEST_F(CliTest, RunReportVerifyAndJobs) {
  write_text(dir / "grid.json", small_grid().dump());
  EXPECT_EQ(run_cli("validate " + (dir / "grid.json").string(), log), 0);
  EXPECT_EQ(run_cli("run " + (dir / "grid.json").string() + " -o " + (dir / "one").string(), log), 0);
  EXPECT_EQ(run_cli("run " + (dir / "grid.json").string() + " --jobs 4 -o " + (dir / "four").string(), log), 0);
  EXPECT_EQ(slurp(dir / "one" / "runs.csv"), slurp(dir / "four" / "runs.csv"));
  EXPECT_EQ(run_cli("verify " + (dir / "one").string(), log), 0);
  EXPECT_EQ(run_cli("report " + (dir / "one").string(), log), 0);
  EXPECT_NE(slurp(log).find("gaussian-d3_hmc_pr_adaptive"), std::string::npos);

  const std::string env = "SMC_OUTPUT_DIR=" + (dir / "env").string() + " ";
  const int status = std::system((env + SMC_BENCH_EXE + " run " + (dir / "grid.json").string() + " > " + log.string() + " 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_EQ(slurp(dir / "one" / "runs.csv"), slurp(dir / "env" / "runs.csv"));
}
