#include "heavytail/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace heavytail;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_mean() {
  ExperimentConfig c;
  c.task = TaskKind::mean;
  c.n = 64;
  c.p = 4;
  c.trials = 60;
  c.methods = {Method::clipped_sgd, Method::vanilla_sgd, Method::mom_coordinate,
               Method::mom_geometric};
  c.hyper = HyperMode::grid;
  c.tuning_trials = 2;
  c.threads = 1;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("heavytail_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, RejectsIncompatibleMethods) {
  auto c = small_mean();
  c.task = TaskKind::regression;
  EXPECT_THROW(c.validate(), std::invalid_argument);  // MoM on regression
  c = small_mean();
  c.methods = {Method::huber};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_mean();
  c.methods = {Method::vanilla_sgd, Method::vanilla_sgd};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Config, RejectsBadValues) {
  auto c = small_mean();
  c.trials = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_mean();
  c.delta_list = {0.5, 1.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_mean();
  c.delta_list.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_mean();
  c.hyper = HyperMode::explicit_values;
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);  // clipped_sgd without lambda
  c.lambda = 2.0;
  EXPECT_NO_THROW(c.validate());
  c = small_mean();
  c.beta_x = 1.9;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_mean();
  c.sweep = SweepSpec{"eta", {1.0}};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Config, ErrorsBeforeAnyWork) {
  auto c = small_mean();
  c.task = TaskKind::regression;
  c.out_dir = fresh_dir("never").string();
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  EXPECT_FALSE(fs::exists(c.out_dir));
}

TEST(Config, JsonRoundTrip) {
  auto c = small_mean();
  c.lambda = 3.5;
  c.beta_x = 3.0;
  c.delta_list = {0.2, 0.02};
  c.sweep = SweepSpec{"lambda", {1, 2}};
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(config_from_json({{"trails", 5}}), std::invalid_argument);
  EXPECT_THROW(config_from_json({{"task", "median"}}), std::invalid_argument);
  const auto methods = config_from_json({{"methods", "ridge,lasso"}});
  EXPECT_EQ(methods.methods, (std::vector<Method>{Method::ridge, Method::lasso}));
}

TEST(Config, JsonOverridesPreset) {
  const auto c = config_from_json({{"preset", "intro"}, {"trials", 7}});
  EXPECT_EQ(c.n, 100u);
  EXPECT_EQ(c.p, 10u);
  EXPECT_EQ(c.trials, 7u);
  EXPECT_EQ(c.lambda, 1.5);
  for (const char* name : {"intro", "full-mean", "full-regression", "sparse-regression", "logistic",
                           "desk-mean", "desk-regression"}) {
    ExperimentConfig p;
    apply_preset(name, p);
    EXPECT_NO_THROW(p.validate()) << name;
  }
  ExperimentConfig p;
  EXPECT_THROW(apply_preset("nope", p), std::invalid_argument);
}

TEST(Experiment, FullScaleMeanConfigIsAccepted) {
  ExperimentConfig c;
  apply_preset("full-mean", c);
  EXPECT_EQ(c.n, 1024u);
  EXPECT_EQ(c.p, 256u);
  EXPECT_EQ(c.trials, 50000u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Experiment, SingleTrialVanillaIsRunningMean) {
  ExperimentConfig c;
  c.n = 50;
  c.p = 3;
  c.trials = 1;
  c.methods = {Method::vanilla_sgd};
  c.hyper = HyperMode::explicit_values;
  c.gamma = 0.0;
  c.seed = 77;
  const auto r = run_experiment(c);
  CounterRng rng(77, 0);
  const TaskSpec task = build_task(c);
  Vector mean = Vector::Zero(3);
  for (int i = 0; i < 50; ++i) mean += draw_sample(task, rng).x;
  mean /= 50.0;
  EXPECT_NEAR(r.report.mean_error.at("vanilla_sgd"), mean.norm(), 1e-12);
}

TEST(Experiment, PairedSamplesAcrossMethods) {
  auto c = small_mean();
  c.methods = {Method::clipped_sgd, Method::vanilla_sgd};
  c.hyper = HyperMode::explicit_values;
  c.gamma = 0.0;
  c.lambda = 1e12;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.matrices[0].final_errors, r.matrices[1].final_errors);
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  auto c = small_mean();
  c.curves = true;
  const auto serial = run_experiment(c);
  for (std::size_t threads : {2u, 7u}) {
    c.threads = threads;
    const auto parallel = run_experiment(c);
    EXPECT_EQ(summary_csv(parallel), summary_csv(serial));
    EXPECT_EQ(curves_csv(parallel), curves_csv(serial));
    EXPECT_EQ(parallel.resolved_json, serial.resolved_json);
  }
}

TEST(Experiment, RepeatableOutputs) {
  auto c = small_mean();
  c.curves = true;
  c.threads = 3;
  const auto a = fresh_dir("a"), b = fresh_dir("b");
  write_results(run_experiment(c), a);
  write_results(run_experiment(c), b);
  for (const char* f : {"summary.csv", "curves.csv", "config.resolved.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_EQ(slurp(a / "summary.csv").substr(0, 32), "method,delta,q_delta,mean_error\n");
  EXPECT_EQ(slurp(a / "curves.csv").substr(0, 31), "method,t,mean_error,q99_error\nc");
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, SummaryShape) {
  auto c = small_mean();
  const auto r = run_experiment(c);
  std::istringstream csv(summary_csv(r));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 4 * 4);
  for (const auto& [method, qs] : r.report.q) {
    for (std::size_t i = 1; i < qs.size(); ++i) EXPECT_LE(qs[i - 1], qs[i]) << method;
  }
}

TEST(Experiment, ResolvedJsonRecordsDerivedValues) {
  auto c = small_mean();
  const auto r = run_experiment(c);
  const auto& m = r.resolved_json.at("methods");
  EXPECT_TRUE(m.at("clipped_sgd").contains("lambda"));
  EXPECT_TRUE(m.at("clipped_sgd").contains("gamma"));
  EXPECT_EQ(m.at("clipped_sgd").at("selection").at("grids")[0].at("values").size(), 21u);
  EXPECT_EQ(m.at("mom_coordinate").at("buckets"), 24);

  c.hyper = HyperMode::theory;
  const auto t = run_experiment(c);
  const auto& theory = t.resolved_json.at("methods").at("clipped_sgd");
  EXPECT_NEAR(theory.at("gamma").get<double>(), 144.0 * std::log(40.0) + 1.0, 1e-9);
  EXPECT_TRUE(theory.at("theory").contains("error_bound"));
}

TEST(Experiment, RegressionGridResolvesAllParameters) {
  ExperimentConfig c;
  c.task = TaskKind::regression;
  c.n = 128;
  c.p = 4;
  c.trials = 20;
  c.methods = {Method::clipped_sgd, Method::vanilla_sgd, Method::lasso, Method::ridge, Method::huber};
  c.hyper = HyperMode::grid;
  c.tuning_trials = 1;
  const auto r = run_experiment(c);
  const auto& m = r.resolved_json.at("methods");
  EXPECT_EQ(m.at("clipped_sgd").at("selection").at("candidates"), 3 * 21);
  EXPECT_EQ(m.at("huber").at("selection").at("candidates"), 3 * 21);
  EXPECT_TRUE(m.at("ridge").contains("reg_weight"));
  EXPECT_FALSE(m.at("vanilla_sgd").contains("lambda"));
}

TEST(Experiment, TheoryRegressionNeedsFourthMoment) {
  ExperimentConfig c;
  c.task = TaskKind::regression;
  c.n = 32;
  c.p = 4;
  c.trials = 2;
  c.beta_x = 3.0;
  c.hyper = HyperMode::theory;
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
}

TEST(Experiment, LogisticAndSparseRun) {
  ExperimentConfig c;
  apply_preset("logistic", c);
  c.trials = 10;
  c.n = 200;
  const auto r = run_experiment(c);
  for (double e : r.matrices[0].final_errors) EXPECT_LE(e, 1.0 + 1e-9);

  ExperimentConfig s;
  apply_preset("sparse-regression", s);
  s.trials = 5;
  s.n = 100;
  s.tuning_trials = 1;
  EXPECT_NO_THROW(run_experiment(s));
}

TEST(Sweep, SingleValueMatchesRun) {
  auto c = small_mean();
  c.hyper = HyperMode::explicit_values;
  c.gamma = 0.0;
  c.lambda = 4.0;
  c.methods = {Method::clipped_sgd, Method::vanilla_sgd};
  const auto single = summary_csv(run_experiment(c));
  c.sweep = SweepSpec{"lambda", {4.0}};
  const auto sweep = sweep_summary_csv(run_sweep(c), "lambda");
  std::istringstream a(single), b(sweep);
  std::string la, lb;
  std::getline(a, la);
  std::getline(b, lb);
  EXPECT_EQ(lb, "lambda," + la);
  while (std::getline(a, la)) {
    ASSERT_TRUE(std::getline(b, lb));
    EXPECT_EQ(lb, "4," + la);
  }
  EXPECT_FALSE(std::getline(b, lb));
}

TEST(Sweep, WritesKeyedFiles) {
  auto c = small_mean();
  c.methods = {Method::clipped_sgd};
  c.hyper = HyperMode::explicit_values;
  c.gamma = 0.0;
  c.curves = true;
  c.sweep = SweepSpec{"lambda", {1.0, 8.0}};
  const auto dir = fresh_dir("sweep");
  write_sweep_results(run_sweep(c), c, dir);
  EXPECT_EQ(slurp(dir / "summary.csv").substr(0, 38), "lambda,method,delta,q_delta,mean_error");
  EXPECT_EQ(slurp(dir / "curves.csv").substr(0, 36), "lambda,method,t,mean_error,q99_error");
  fs::remove_all(dir);
}

TEST(Output, FailedWriteLeavesNothingBehind) {
  auto c = small_mean();
  c.trials = 5;
  const auto r = run_experiment(c);
  const auto dir = fresh_dir("fail");
  fs::create_directories(dir / "config.resolved.json.tmp" / "blocker");
  EXPECT_ANY_THROW(write_results(r, dir));
  EXPECT_FALSE(fs::exists(dir / "summary.csv"));
  EXPECT_FALSE(fs::exists(dir / "summary.csv.tmp"));
  EXPECT_FALSE(fs::exists(dir / "config.resolved.json"));
  EXPECT_TRUE(fs::exists(dir / "config.resolved.json.tmp" / "blocker"));
  fs::remove_all(dir);
}

TEST(Names, RoundTrip) {
  for (auto m : {Method::clipped_sgd, Method::vanilla_sgd, Method::mom_coordinate,
                 Method::mom_geometric, Method::lasso, Method::ridge, Method::huber}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  for (auto t : {TaskKind::mean, TaskKind::regression, TaskKind::sparse_regression, TaskKind::logistic}) {
    EXPECT_EQ(parse_task(to_string(t)), t);
  }
  EXPECT_EQ(parse_hyper_mode("explicit"), HyperMode::explicit_values);
  EXPECT_THROW(parse_methods("clipped_sgd,bogus"), std::invalid_argument);
}
