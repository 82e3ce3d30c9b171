// Command-line front end: run, sweep, validate, selftest.

#include "heavytail/harness.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/theory.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>

namespace ht = heavytail;

namespace {

struct Overrides {
  std::string config_path;
  std::string preset;
  std::string task, methods, hyper, noise, out_dir;
  std::size_t n = 0, p = 0, trials = 0, sparsity = 0, threads = 0, tuning_trials = 0, mom_buckets = 0;
  double sigma2 = 0, beta_x = 0, beta_w = 0, lambda = 0, gamma = 0, reg_weight = 0, c1 = 0,
         delta = 0, q = 0;
  std::uint64_t seed = 0;
  std::vector<double> delta_list;
  bool curves = false;
  std::string sweep_param;
  std::vector<double> sweep_values;
};

void add_config_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "JSON config file (flags override its values)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--preset", o.preset,
                 "intro, full-mean, full-regression, sparse-regression, logistic, desk-mean, "
                 "desk-regression");
  cmd.add_option("--task", o.task, "mean, regression, sparse_regression, logistic");
  cmd.add_option("--n", o.n, "samples per trial");
  cmd.add_option("--p", o.p, "dimension");
  cmd.add_option("--trials", o.trials, "Monte-Carlo trials");
  cmd.add_option("--sigma2", o.sigma2, "regression noise variance");
  cmd.add_option("--beta-x", o.beta_x, "Pareto tail of samples / covariates");
  cmd.add_option("--beta-w", o.beta_w, "Pareto tail of regression noise");
  cmd.add_option("--sparsity", o.sparsity, "nonzeros in theta* for sparse_regression");
  cmd.add_option("--noise", o.noise, "pareto or gaussian (mean task)");
  cmd.add_option("--seed", o.seed, "master seed");
  cmd.add_option("--methods", o.methods,
                 "comma list of clipped_sgd, vanilla_sgd, mom_coordinate, mom_geometric, lasso, "
                 "ridge, huber");
  cmd.add_option("--hyper", o.hyper, "theory, grid or explicit");
  cmd.add_option("--lambda", o.lambda, "clipping level");
  cmd.add_option("--gamma", o.gamma, "step-size delay");
  cmd.add_option("--reg-weight", o.reg_weight, "lasso/ridge weight or huber threshold");
  cmd.add_option("--c1", o.c1, "theory scaling constant");
  cmd.add_option("--delta", o.delta, "confidence level used by the theory formulas");
  cmd.add_option("--delta-list", o.delta_list, "quantile levels reported in summary.csv")
      ->delimiter(',');
  cmd.add_option("--q", o.q, "sequential validation fraction");
  cmd.add_option("--tuning-trials", o.tuning_trials, "tuning streams averaged in grid mode");
  cmd.add_option("--mom-buckets", o.mom_buckets, "median-of-means buckets (0 = default)");
  cmd.add_flag("--curves", o.curves, "record convergence curves");
  cmd.add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd.add_option("--out-dir", o.out_dir, "output directory");
}

ht::ExperimentConfig resolve_config(const CLI::App& cmd, const Overrides& o) {
  ht::ExperimentConfig c;
  if (!o.preset.empty()) ht::apply_preset(o.preset, c);
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(fmt::format("{}: {}", o.config_path, e.what()));
    }
    c = ht::config_from_json(j, c);
  }
  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  if (given("--task")) c.task = ht::parse_task(o.task);
  if (given("--n")) c.n = o.n;
  if (given("--p")) c.p = o.p;
  if (given("--trials")) c.trials = o.trials;
  if (given("--sigma2")) c.sigma2 = o.sigma2;
  if (given("--beta-x")) c.beta_x = o.beta_x;
  if (given("--beta-w")) c.beta_w = o.beta_w;
  if (given("--sparsity")) c.sparsity = o.sparsity;
  if (given("--noise")) c = ht::config_from_json({{"noise", o.noise}}, c);
  if (given("--seed")) c.seed = o.seed;
  if (given("--methods")) c.methods = ht::parse_methods(o.methods);
  if (given("--hyper")) c.hyper = ht::parse_hyper_mode(o.hyper);
  if (given("--lambda")) c.lambda = o.lambda;
  if (given("--gamma")) c.gamma = o.gamma;
  if (given("--reg-weight")) c.reg_weight = o.reg_weight;
  if (given("--c1")) c.c1 = o.c1;
  if (given("--delta")) c.delta = o.delta;
  if (given("--delta-list")) c.delta_list = o.delta_list;
  if (given("--q")) c.q = o.q;
  if (given("--tuning-trials")) c.tuning_trials = o.tuning_trials;
  if (given("--mom-buckets")) c.mom_buckets = o.mom_buckets;
  if (given("--curves")) c.curves = o.curves;
  if (given("--threads")) c.threads = o.threads;
  if (given("--out-dir")) c.out_dir = o.out_dir;
  if (cmd.get_option_no_throw("--sweep-param") && given("--sweep-param")) {
    c.sweep = ht::SweepSpec{o.sweep_param, o.sweep_values};
  }
  return c;
}

void print_summary(const ht::ExperimentResult& r) {
  for (const auto& m : r.matrices) {
    std::string line = fmt::format("{:<16} mean={:.4g}", m.method, r.report.mean_error.at(m.method));
    const auto& qs = r.report.q.at(m.method);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      line += fmt::format("  Q[{}]={:.4g}", r.report.deltas[i], qs[i]);
    }
    std::cout << line << '\n';
  }
}

int selftest() {
  int failures = 0;
  auto check = [&](const std::string& name, const std::function<bool()>& body) {
    bool ok = false;
    try {
      ok = body();
    } catch (const std::exception& e) {
      std::cout << "  (" << e.what() << ")\n";
    }
    std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    if (!ok) ++failures;
  };

  check("philox known answer", [] {
    const auto out = ht::CounterRng::philox_block({0, 0, 0, 0}, {0, 0});
    return out == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8};
  });

  check("vanilla sgd equals running mean", [] {
    ht::ExperimentConfig c;
    auto task = ht::build_task(c);
    auto model = ht::make_model(task);
    ht::CounterRng rng(7, 0);
    std::vector<ht::Sample> buf;
    for (int i = 0; i < 200; ++i) buf.push_back(ht::draw_sample(task, rng));
    ht::OptimizerConfig oc;
    ht::BufferStream stream(buf);
    auto res = ht::run(model, oc, stream, buf.size());
    ht::Vector mean = ht::Vector::Zero(static_cast<ht::Index>(c.p));
    for (const auto& s : buf) mean += s.x;
    mean /= static_cast<double>(buf.size());
    return (res.final_param - mean).lpNorm<Eigen::Infinity>() < 1e-9;
  });

  check("clip respects level", [] {
    ht::Vector g = ht::Vector::Constant(5, 3.0);
    return std::abs(ht::clip(g, 2.0).norm() - 2.0) < 1e-12 && ht::clip(g, 100.0) == g;
  });

  check("quantile on 1..10", [] {
    std::vector<double> e{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
    return ht::quantile_loss(e, 0.1) == 9.0 && ht::quantile_loss(e, 0.5) == 5.0;
  });

  check("mean-task theory delay", [] {
    auto out = ht::mean_hyperparams(4.0, 100, 0.05, 1.0);
    return std::abs(out.gamma - (144.0 * std::log(40.0) + 1.0)) < 1e-9;
  });

  check("freedman bound", [] {
    return std::abs(ht::freedman_bound(2.0, 1.0, 0.5) - std::exp(-1.0)) < 1e-15;
  });

  check("small experiment is thread-count invariant", [] {
    ht::ExperimentConfig c;
    c.n = 64;
    c.p = 4;
    c.trials = 40;
    c.methods = {ht::Method::clipped_sgd, ht::Method::vanilla_sgd, ht::Method::mom_coordinate};
    c.threads = 1;
    const auto a = ht::summary_csv(ht::run_experiment(c));
    c.threads = 4;
    const auto b = ht::summary_csv(ht::run_experiment(c));
    return a == b;
  });

  std::cout << (failures == 0 ? "selftest passed" : fmt::format("selftest: {} failure(s)", failures))
            << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed streaming estimation benchmark"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o, validate_o;
  auto* run_cmd = app.add_subcommand("run", "run one experiment and write summary.csv");
  add_config_options(*run_cmd, run_o);
  auto* sweep_cmd = app.add_subcommand("sweep", "repeat an experiment over a parameter grid");
  add_config_options(*sweep_cmd, sweep_o);
  sweep_cmd->add_option("--sweep-param", sweep_o.sweep_param, "lambda, gamma, reg_weight or sigma2");
  sweep_cmd->add_option("--sweep-values", sweep_o.sweep_values, "comma list of values")
      ->delimiter(',');
  auto* validate_cmd = app.add_subcommand("validate", "check a config and print it resolved");
  add_config_options(*validate_cmd, validate_o);
  auto* selftest_cmd = app.add_subcommand("selftest", "quick internal consistency checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*selftest_cmd) return selftest();

    if (*validate_cmd) {
      auto c = resolve_config(*validate_cmd, validate_o);
      c.validate();
      std::cout << ht::to_json(c).dump(2) << '\n';
      return 0;
    }

    if (*run_cmd) {
      auto c = resolve_config(*run_cmd, run_o);
      const auto start = std::chrono::steady_clock::now();
      auto result = ht::run_experiment(c);
      ht::write_results(result, c.out_dir);
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
      print_summary(result);
      std::cerr << fmt::format("{} trials in {:.2f}s, results in {}\n", c.trials, took.count(),
                               c.out_dir);
      return 0;
    }

    if (*sweep_cmd) {
      auto c = resolve_config(*sweep_cmd, sweep_o);
      if (!c.sweep) throw std::invalid_argument("sweep needs --sweep-param/--sweep-values or a sweep block");
      auto points = ht::run_sweep(c);
      ht::write_sweep_results(points, c, c.out_dir);
      for (const auto& pt : points) {
        std::cout << c.sweep->parameter << " = " << pt.value << '\n';
        print_summary(pt.result);
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
