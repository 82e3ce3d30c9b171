#pragma once

#include "heavytail/batch_baselines.hpp"
#include "heavytail/distributions.hpp"
#include "heavytail/metrics.hpp"
#include "heavytail/models.hpp"
#include "heavytail/optimizer.hpp"
#include "heavytail/selection.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace heavytail {

enum class TaskKind { mean, regression, sparse_regression, logistic };
enum class Method { clipped_sgd, vanilla_sgd, mom_coordinate, mom_geometric, lasso, ridge, huber };
enum class HyperMode { theory, grid, explicit_values };

std::string to_string(TaskKind t);
std::string to_string(Method m);
std::string to_string(HyperMode h);
TaskKind parse_task(const std::string& s);
Method parse_method(const std::string& s);
HyperMode parse_hyper_mode(const std::string& s);
std::vector<Method> parse_methods(const std::string& comma_separated);

bool is_sgd_method(Method m);

/// Swept quantity: lambda, gamma, reg_weight or sigma2.
struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

struct ExperimentConfig {
  TaskKind task = TaskKind::mean;
  std::size_t n = 1024;
  std::size_t p = 32;
  std::size_t trials = 2000;
  double sigma2 = 0.75;
  /// Defaults: 2.1 for mean samples, 4.1 for covariates.
  std::optional<double> beta_x;
  /// Default 2.1.
  std::optional<double> beta_w;
  /// Nonzero coordinates of theta* for sparse_regression.
  std::size_t sparsity = 3;
  NoiseFamily noise = NoiseFamily::pareto;
  std::uint64_t seed = 0;
  std::vector<Method> methods = {Method::clipped_sgd, Method::vanilla_sgd};
  HyperMode hyper = HyperMode::theory;
  /// Pinned values; anything left empty is resolved by `hyper`.
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::optional<double> reg_weight;
  double c1 = 1.0;
  /// Confidence level fed to the theory formulas.
  double delta = 0.05;
  std::vector<double> delta_list = {0.5, 0.1, 0.01, 0.001};
  double q = 0.2;
  /// Independent streams averaged by sequential validation in grid mode.
  std::size_t tuning_trials = 4;
  /// 0 selects ceil(8 log(1/0.05)).
  std::size_t mom_buckets = 0;
  bool curves = false;
  /// 0 uses std::thread::hardware_concurrency().
  std::size_t threads = 0;
  std::optional<SweepSpec> sweep;
  std::string out_dir = "results";

  /// Throws std::invalid_argument on inconsistent settings, including methods
  /// that do not apply to the task.
  void validate() const;
};

/// Applies a named preset (intro, full-mean, full-regression, sparse-regression,
/// logistic, desk-mean, desk-regression) on top of `config`.
void apply_preset(const std::string& name, ExperimentConfig& config);

/// Reads any subset of the fields written by to_json on top of `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json to_json(const ExperimentConfig& config);

TaskSpec build_task(const ExperimentConfig& config);

struct ResolvedMethod {
  Method method = Method::clipped_sgd;
  std::optional<OptimizerConfig> optimizer;
  std::optional<MoMConfig> mom;
  /// Resolved hyperparameters and where each came from.
  nlohmann::json details;
};

/// Fixes every hyperparameter of every method (theory formulas, sequential
/// validation on dedicated tuning streams, or pinned values).
std::vector<ResolvedMethod> resolve_methods(const ExperimentConfig& config, const TaskSpec& task,
                                            const LossModelPtr& model);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResolvedMethod> resolved;
  /// One per method, in config order.
  std::vector<TrialMatrix> matrices;
  QuantileReport report;
  nlohmann::json resolved_json;
};

/// Runs all trials. Trial i draws its samples from stream (seed, i) and every
/// method sees the same samples. Output is independent of the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct SweepPoint {
  double value = 0.0;
  ExperimentResult result;
};

/// One experiment per swept value, all with the same master seed.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& config);

/// `method,delta,q_delta,mean_error` rows.
std::string summary_csv(const ExperimentResult& result);
/// `method,t,mean_error,q99_error` rows for the SGD methods.
std::string curves_csv(const ExperimentResult& result);
std::string sweep_summary_csv(const std::vector<SweepPoint>& sweep, const std::string& key);
std::string sweep_curves_csv(const std::vector<SweepPoint>& sweep, const std::string& key);

/// Writes summary.csv, config.resolved.json and (with curves) curves.csv. Files
/// are written to temporaries and renamed; on failure nothing is left behind.
void write_results(const ExperimentResult& result, const std::filesystem::path& out_dir);
void write_sweep_results(const std::vector<SweepPoint>& sweep, const ExperimentConfig& config,
                         const std::filesystem::path& out_dir);

}  // namespace heavytail
