#include "heavytail/harness.hpp"

#include "heavytail/theory.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace heavytail {

namespace {

template <class Enum>
struct Names {
  Enum value;
  const char* name;
};

constexpr Names<TaskKind> kTasks[] = {{TaskKind::mean, "mean"},
                                      {TaskKind::regression, "regression"},
                                      {TaskKind::sparse_regression, "sparse_regression"},
                                      {TaskKind::logistic, "logistic"}};

constexpr Names<Method> kMethods[] = {{Method::clipped_sgd, "clipped_sgd"},
                                      {Method::vanilla_sgd, "vanilla_sgd"},
                                      {Method::mom_coordinate, "mom_coordinate"},
                                      {Method::mom_geometric, "mom_geometric"},
                                      {Method::lasso, "lasso"},
                                      {Method::ridge, "ridge"},
                                      {Method::huber, "huber"}};

constexpr Names<HyperMode> kModes[] = {{HyperMode::theory, "theory"},
                                       {HyperMode::grid, "grid"},
                                       {HyperMode::explicit_values, "explicit"}};

template <class Enum, std::size_t N>
std::string name_of(const Names<Enum> (&table)[N], Enum v) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "?";
}

template <class Enum, std::size_t N>
Enum parse_name(const Names<Enum> (&table)[N], const std::string& s, const char* what) {
  for (const auto& e : table) {
    if (s == e.name) return e.value;
  }
  std::string options;
  for (const auto& e : table) options += std::string(options.empty() ? "" : ", ") + e.name;
  throw std::invalid_argument(fmt::format("unknown {} '{}' (expected one of: {})", what, s, options));
}

bool is_regression(TaskKind t) {
  return t == TaskKind::regression || t == TaskKind::sparse_regression;
}

std::string num(double v) { return fmt::format("{}", v); }

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<Sample> draw_buffer(const TaskSpec& task, std::uint64_t seed, std::uint64_t stream,
                                std::size_t n) {
  CounterRng rng(seed, stream);
  std::vector<Sample> buffer;
  buffer.reserve(n);
  for (std::size_t i = 0; i < n; ++i) buffer.push_back(draw_sample(task, rng));
  return buffer;
}

double final_error(const Vector& theta, const Vector& truth) { return (theta - truth).norm(); }

}  // namespace

std::string to_string(TaskKind t) { return name_of(kTasks, t); }
std::string to_string(Method m) { return name_of(kMethods, m); }
std::string to_string(HyperMode h) { return name_of(kModes, h); }
TaskKind parse_task(const std::string& s) { return parse_name(kTasks, s, "task"); }
Method parse_method(const std::string& s) { return parse_name(kMethods, s, "method"); }
HyperMode parse_hyper_mode(const std::string& s) { return parse_name(kModes, s, "hyper mode"); }

std::vector<Method> parse_methods(const std::string& comma_separated) {
  std::vector<Method> out;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  return out;
}

bool is_sgd_method(Method m) {
  return m != Method::mom_coordinate && m != Method::mom_geometric;
}

void ExperimentConfig::validate() const {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (p == 0) throw std::invalid_argument("p must be >= 1");
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  if (methods.empty()) throw std::invalid_argument("no methods selected");
  std::set<Method> seen;
  for (Method m : methods) {
    if (!seen.insert(m).second)
      throw std::invalid_argument("method '" + to_string(m) + "' listed twice");
    if (!is_sgd_method(m) && task != TaskKind::mean)
      throw std::invalid_argument("method '" + to_string(m) + "' only applies to the mean task");
    if (m == Method::huber && !is_regression(task))
      throw std::invalid_argument("method 'huber' only applies to regression tasks");
  }
  if (delta_list.empty()) throw std::invalid_argument("delta list is empty");
  for (double d : delta_list) {
    if (!(d > 0.0) || !(d < 1.0)) throw std::invalid_argument("delta list entries must lie in (0, 1)");
  }
  if (!(delta > 0.0) || !(delta < 2.0 / std::exp(1.0)))
    throw std::invalid_argument("theory delta must lie in (0, 2/e)");
  if (!(c1 >= 1.0)) throw std::invalid_argument("c1 must be >= 1");
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("sigma2 must be >= 0");
  if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  if (hyper == HyperMode::grid && (tuning_trials == 0 || validation_window(n, q) < 1))
    throw std::invalid_argument("grid mode needs tuning_trials >= 1 and ceil(q n) >= 1");
  if (task == TaskKind::sparse_regression && (sparsity == 0 || sparsity > p))
    throw std::invalid_argument("sparsity must satisfy 1 <= r <= p");
  if (lambda && !(*lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (gamma && !(*gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (reg_weight && !(*reg_weight >= 0.0)) throw std::invalid_argument("reg_weight must be >= 0");
  for (Method m : methods) {
    if (m == Method::mom_coordinate || m == Method::mom_geometric) {
      const std::size_t k = mom_buckets ? mom_buckets : default_bucket_count(0.05);
      if (k > n) throw std::invalid_argument("median-of-means needs n >= number of buckets");
    }
  }
  if (hyper == HyperMode::explicit_values) {
    // A swept parameter is supplied per sweep point.
    const auto swept = [this](const char* name) { return sweep && sweep->parameter == name; };
    for (Method m : methods) {
      if (!is_sgd_method(m)) continue;
      if (!gamma && !swept("gamma")) throw std::invalid_argument("explicit mode requires gamma");
      if (m == Method::clipped_sgd && !lambda && !swept("lambda"))
        throw std::invalid_argument("explicit mode requires lambda for clipped_sgd");
      if ((m == Method::lasso || m == Method::ridge || m == Method::huber) && !reg_weight &&
          !swept("reg_weight"))
        throw std::invalid_argument("explicit mode requires reg_weight for regularized baselines");
    }
  }
  if (sweep) {
    if (sweep->values.empty()) throw std::invalid_argument("sweep grid is empty");
    static const std::set<std::string> kSweepable = {"lambda", "gamma", "reg_weight", "sigma2"};
    if (!kSweepable.count(sweep->parameter))
      throw std::invalid_argument("cannot sweep '" + sweep->parameter +
                                  "' (expected lambda, gamma, reg_weight or sigma2)");
  }
  heavytail::validate(build_task(*this));
}

void apply_preset(const std::string& name, ExperimentConfig& c) {
  if (name == "intro") {
    c.task = TaskKind::mean;
    c.n = 100;
    c.p = 10;
    c.trials = 100000;
    c.hyper = HyperMode::explicit_values;
    c.lambda = 1.5;
    c.gamma = 0.0;
    c.methods = {Method::clipped_sgd, Method::vanilla_sgd};
  } else if (name == "full-mean") {
    c.task = TaskKind::mean;
    c.n = 1024;
    c.p = 256;
    c.trials = 50000;
    c.hyper = HyperMode::grid;
    c.methods = {Method::clipped_sgd, Method::vanilla_sgd, Method::mom_coordinate,
                 Method::mom_geometric};
    c.delta_list = {0.5, 0.1, 0.01, 0.001};
  } else if (name == "full-regression") {
    c.task = TaskKind::regression;
    c.n = 1024;
    c.p = 256;
    c.trials = 50000;
    c.sigma2 = 0.75;
    c.hyper = HyperMode::grid;
    c.methods = {Method::clipped_sgd, Method::vanilla_sgd, Method::lasso, Method::ridge,
                 Method::huber};
  } else if (name == "sparse-regression") {
    c.task = TaskKind::sparse_regression;
    c.n = 1000;
    c.p = 20;
    c.sparsity = 3;
    c.sigma2 = 0.75;
    c.gamma = 20.0;
    c.hyper = HyperMode::grid;
    c.methods = {Method::clipped_sgd, Method::vanilla_sgd, Method::lasso, Method::ridge,
                 Method::huber};
  } else if (name == "logistic") {
    c.task = TaskKind::logistic;
    c.n = 1000;
    c.p = 10;
    c.trials = 5000;
    c.hyper = HyperMode::explicit_values;
    c.gamma = 2000.0;
    c.lambda = 0.5;
    c.methods = {Method::clipped_sgd, Method::vanilla_sgd};
  } else if (name == "desk-mean") {
    c.task = TaskKind::mean;
    c.n = 1024;
    c.p = 32;
    c.trials = 2000;
    c.hyper = HyperMode::grid;
    c.methods = {Method::clipped_sgd, Method::vanilla_sgd, Method::mom_coordinate,
                 Method::mom_geometric};
  } else if (name == "desk-regression") {
    c.task = TaskKind::regression;
    c.n = 1024;
    c.p = 32;
    c.trials = 2000;
    c.hyper = HyperMode::grid;
    c.methods = {Method::clipped_sgd, Method::vanilla_sgd, Method::lasso, Method::ridge,
                 Method::huber};
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  static const std::set<std::string> kKeys = {
      "task",  "n",          "p",     "trials", "sigma2",     "beta_x",        "beta_w",
      "sparsity", "noise",   "seed",  "methods", "hyper",     "lambda",        "gamma",
      "reg_weight", "c1",    "delta", "delta_list", "q",      "tuning_trials", "mom_buckets",
      "curves", "threads",   "sweep", "out_dir", "preset"};
  if (!j.is_object()) throw std::invalid_argument("config JSON must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  if (j.contains("preset")) apply_preset(j.at("preset").get<std::string>(), c);
  auto opt_double = [&](const char* key, std::optional<double>& field) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
      field.reset();
    } else {
      field = j.at(key).get<double>();
    }
  };
  if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
  if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
  if (j.contains("p")) c.p = j.at("p").get<std::size_t>();
  if (j.contains("trials")) c.trials = j.at("trials").get<std::size_t>();
  if (j.contains("sigma2")) c.sigma2 = j.at("sigma2").get<double>();
  opt_double("beta_x", c.beta_x);
  opt_double("beta_w", c.beta_w);
  if (j.contains("sparsity")) c.sparsity = j.at("sparsity").get<std::size_t>();
  if (j.contains("noise")) {
    const auto noise = j.at("noise").get<std::string>();
    if (noise == "pareto") {
      c.noise = NoiseFamily::pareto;
    } else if (noise == "gaussian") {
      c.noise = NoiseFamily::gaussian;
    } else {
      throw std::invalid_argument("noise must be 'pareto' or 'gaussian'");
    }
  }
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("methods")) {
    const auto& m = j.at("methods");
    if (m.is_string()) {
      c.methods = parse_methods(m.get<std::string>());
    } else {
      c.methods.clear();
      for (const auto& item : m) c.methods.push_back(parse_method(item.get<std::string>()));
    }
  }
  if (j.contains("hyper")) c.hyper = parse_hyper_mode(j.at("hyper").get<std::string>());
  opt_double("lambda", c.lambda);
  opt_double("gamma", c.gamma);
  opt_double("reg_weight", c.reg_weight);
  if (j.contains("c1")) c.c1 = j.at("c1").get<double>();
  if (j.contains("delta")) c.delta = j.at("delta").get<double>();
  if (j.contains("delta_list")) c.delta_list = j.at("delta_list").get<std::vector<double>>();
  if (j.contains("q")) c.q = j.at("q").get<double>();
  if (j.contains("tuning_trials")) c.tuning_trials = j.at("tuning_trials").get<std::size_t>();
  if (j.contains("mom_buckets")) c.mom_buckets = j.at("mom_buckets").get<std::size_t>();
  if (j.contains("curves")) c.curves = j.at("curves").get<bool>();
  if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (s.is_null()) {
      c.sweep.reset();
    } else {
      c.sweep = SweepSpec{s.at("parameter").get<std::string>(),
                          s.at("values").get<std::vector<double>>()};
    }
  }
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  j["task"] = to_string(c.task);
  j["n"] = c.n;
  j["p"] = c.p;
  j["trials"] = c.trials;
  j["sigma2"] = c.sigma2;
  j["beta_x"] = opt(c.beta_x);
  j["beta_w"] = opt(c.beta_w);
  j["sparsity"] = c.sparsity;
  j["noise"] = c.noise == NoiseFamily::pareto ? "pareto" : "gaussian";
  j["seed"] = c.seed;
  j["methods"] = nlohmann::json::array();
  for (Method m : c.methods) j["methods"].push_back(to_string(m));
  j["hyper"] = to_string(c.hyper);
  j["lambda"] = opt(c.lambda);
  j["gamma"] = opt(c.gamma);
  j["reg_weight"] = opt(c.reg_weight);
  j["c1"] = c.c1;
  j["delta"] = c.delta;
  j["delta_list"] = c.delta_list;
  j["q"] = c.q;
  j["tuning_trials"] = c.tuning_trials;
  j["mom_buckets"] = c.mom_buckets;
  j["curves"] = c.curves;
  if (c.sweep) {
    j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  } else {
    j["sweep"] = nullptr;
  }
  // threads and out_dir are execution settings and do not affect results.
  return j;
}

TaskSpec build_task(const ExperimentConfig& c) {
  switch (c.task) {
    case TaskKind::mean:
      return MeanTaskSpec::standard(c.p, c.beta_x.value_or(2.1), c.noise);
    case TaskKind::regression:
      return RegressionTaskSpec::dense(c.p, c.sigma2, c.beta_x.value_or(4.1), c.beta_w.value_or(2.1));
    case TaskKind::sparse_regression:
      return RegressionTaskSpec::sparse(c.p, c.sparsity, c.sigma2, c.beta_x.value_or(4.1),
                                        c.beta_w.value_or(2.1));
    case TaskKind::logistic:
      return LogisticTaskSpec::standard(c.p, c.beta_x.value_or(4.1));
  }
  throw std::invalid_argument("unknown task");
}

std::vector<ResolvedMethod> resolve_methods(const ExperimentConfig& config, const TaskSpec& task,
                                            const LossModelPtr& model) {
  const double tau_l = model->constants().tau_l;
  const double init_error = (task_initial(task) - task_true_param(task)).norm();

  std::optional<TheoryOutputs> theory;
  auto theory_values = [&]() -> const TheoryOutputs& {
    if (theory) return *theory;
    TheoryInputs in;
    in.constants = model->constants();
    in.n = config.n;
    in.delta = config.delta;
    in.init_error = init_error;
    in.c1 = config.c1;
    switch (config.task) {
      case TaskKind::mean:
        theory = mean_hyperparams(model->constants().beta, config.n, config.delta,
                                        init_error, config.c1);
        break;
      case TaskKind::regression:
      case TaskKind::sparse_regression:
        if (!in.constants.c4)
          throw std::invalid_argument(
              "theory mode needs covariates with a finite fourth moment (beta_x > 4)");
        theory = regression_hyperparams(in, config.p, config.sigma2);
        break;
      case TaskKind::logistic:
        theory = general_hyperparams(in);
        break;
    }
    return *theory;
  };

  const GridTask grid_task = config.task == TaskKind::mean ? GridTask::mean : GridTask::regression;
  const auto defaults = default_grids(grid_task, config.n, config.p);
  auto default_grid = [&](HyperParameter param) {
    for (const auto& g : defaults) {
      if (g.parameter == param) {
        CandidateGrid out = g;
        out.q = config.q;
        return out;
      }
    }
    throw std::logic_error("no default grid for " + to_string(param));
  };

  std::vector<std::vector<Sample>> tuning;
  auto tuning_buffers = [&]() -> const std::vector<std::vector<Sample>>& {
    if (tuning.empty()) {
      for (std::size_t k = 0; k < config.tuning_trials; ++k) {
        tuning.push_back(draw_buffer(task, config.seed, tuning_stream(k), config.n));
      }
    }
    return tuning;
  };

  std::vector<ResolvedMethod> resolved;
  for (Method m : config.methods) {
    ResolvedMethod rm;
    rm.method = m;
    if (!is_sgd_method(m)) {
      MoMConfig mom;
      mom.n_buckets = config.mom_buckets ? config.mom_buckets : default_bucket_count(0.05);
      mom.variant = m == Method::mom_coordinate ? MomVariant::coordinate_wise : MomVariant::geometric;
      rm.mom = mom;
      rm.details = {{"buckets", mom.n_buckets}};
      resolved.push_back(std::move(rm));
      continue;
    }

    OptimizerConfig base;
    base.record_trajectory = config.curves;
    std::vector<CandidateGrid> grids;
    nlohmann::json sources;

    double gamma = 0.0;
    if (config.gamma) {
      gamma = *config.gamma;
      sources["gamma"] = "pinned";
    } else if (config.hyper == HyperMode::theory) {
      gamma = theory_values().gamma;
      sources["gamma"] = "theory";
    } else if (config.task == TaskKind::mean) {
      // Mean estimation uses eta_t = 1/t.
      sources["gamma"] = "mean-task default";
    } else {
      grids.push_back(default_grid(HyperParameter::delay));
      sources["gamma"] = "grid";
    }
    base.schedule = StepSchedule(tau_l, gamma);

    if (m == Method::clipped_sgd) {
      if (config.lambda) {
        base.clip_level = *config.lambda;
        sources["lambda"] = "pinned";
      } else if (config.hyper == HyperMode::theory) {
        base.clip_level = theory_values().lambda;
        sources["lambda"] = "theory";
      } else {
        base.clip_level = 0.0;
        grids.push_back(default_grid(HyperParameter::clip_level));
        sources["lambda"] = "grid";
      }
    }

    if (m == Method::lasso || m == Method::ridge || m == Method::huber) {
      double weight = 0.0;
      if (config.reg_weight) {
        weight = *config.reg_weight;
        sources["reg_weight"] = "pinned";
      } else if (config.hyper == HyperMode::theory) {
        weight = default_grid(HyperParameter::reg_weight).values.front();
        sources["reg_weight"] = "smallest grid value";
      } else {
        grids.push_back(default_grid(HyperParameter::reg_weight));
        sources["reg_weight"] = "grid";
      }
      if (m == Method::lasso) base.regularizer = Regularizer::lasso(weight);
      if (m == Method::ridge) base.regularizer = Regularizer::ridge(weight);
      if (m == Method::huber) base.regularizer = Regularizer::huber(weight > 0.0 ? weight : 1.0);
    }

    if (!grids.empty()) {
      const auto candidates = product_grid(base, grids);
      std::vector<double> mean_scores(candidates.size(), 0.0);
      for (const auto& buffer : tuning_buffers()) {
        BufferStream stream(buffer);
        const auto sel = sequential_validate(model, candidates, stream, config.n, config.q);
        for (std::size_t i = 0; i < candidates.size(); ++i) mean_scores[i] += sel.scores[i];
      }
      for (auto& s : mean_scores) s /= static_cast<double>(config.tuning_trials);
      const std::size_t winner = argmin_index(mean_scores);
      base = candidates[winner];
      nlohmann::json grid_json = nlohmann::json::array();
      for (const auto& g : grids) grid_json.push_back({{"parameter", to_string(g.parameter)}, {"values", g.values}});
      rm.details["selection"] = {{"grids", grid_json},
                                 {"candidates", candidates.size()},
                                 {"winner_index", winner},
                                 {"scores", mean_scores},
                                 {"q", config.q},
                                 {"tuning_trials", config.tuning_trials}};
    }

    rm.details["gamma"] = base.schedule.gamma();
    rm.details["tau_l"] = base.schedule.tau_l();
    if (base.clip_level) rm.details["lambda"] = *base.clip_level;
    if (base.regularizer.kind == Regularizer::Kind::huber) {
      rm.details["reg_weight"] = base.regularizer.threshold;
    } else if (base.regularizer.kind != Regularizer::Kind::none) {
      rm.details["reg_weight"] = base.regularizer.weight;
    }
    rm.details["sources"] = sources;
    if (theory) {
      rm.details["theory"] = {{"gamma", theory->gamma},
                              {"lambda", theory->lambda},
                              {"error_bound", theory->error_bound},
                              {"delta", config.delta},
                              {"c1", config.c1}};
    }
    rm.optimizer = base;
    resolved.push_back(std::move(rm));
  }
  return resolved;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const TaskSpec task = build_task(config);
  const LossModelPtr model = make_model(task);
  const Vector& truth = model->true_param();

  ExperimentResult result;
  result.config = config;
  result.resolved = resolve_methods(config, task, model);

  const std::size_t n_methods = result.resolved.size();
  result.matrices.resize(n_methods);
  for (std::size_t m = 0; m < n_methods; ++m) {
    auto& mat = result.matrices[m];
    mat.method = to_string(result.resolved[m].method);
    mat.final_errors.assign(config.trials, 0.0);
    if (config.curves && result.resolved[m].optimizer) mat.trajectories.resize(config.trials);
  }

  parallel_for(config.trials, config.threads, [&](std::size_t trial) {
    const auto buffer = draw_buffer(task, config.seed, trial, config.n);
    std::vector<Vector> xs;
    for (std::size_t m = 0; m < n_methods; ++m) {
      const auto& rm = result.resolved[m];
      auto& mat = result.matrices[m];
      if (rm.optimizer) {
        BufferStream stream(buffer);
        auto run_result = run(model, *rm.optimizer, stream, config.n);
        mat.final_errors[trial] = final_error(run_result.final_param, truth);
        if (run_result.l2_error_trajectory) {
          mat.trajectories[trial] = std::move(*run_result.l2_error_trajectory);
        }
      } else {
        if (xs.empty()) {
          xs.reserve(buffer.size());
          for (const auto& s : buffer) xs.push_back(s.x);
        }
        mat.final_errors[trial] = final_error(median_of_means(xs, *rm.mom), truth);
      }
    }
  });

  result.report = quantile_report(result.matrices, config.delta_list);

  nlohmann::json& rj = result.resolved_json;
  rj["config"] = to_json(config);
  const auto& c = model->constants();
  rj["model"] = {{"tau_l", c.tau_l}, {"tau_u", c.tau_u}, {"alpha", std::isfinite(c.alpha) ? nlohmann::json(c.alpha) : nlohmann::json("inf")},
                 {"beta", c.beta}, {"c4", c.c4 ? nlohmann::json(*c.c4) : nlohmann::json(nullptr)},
                 {"init_error", (task_initial(task) - truth).norm()}};
  rj["methods"] = nlohmann::json::object();
  for (const auto& rm : result.resolved) rj["methods"][to_string(rm.method)] = rm.details;
  return result;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& config) {
  if (!config.sweep) throw std::invalid_argument("config has no sweep");
  config.validate();
  std::vector<SweepPoint> points;
  for (double v : config.sweep->values) {
    ExperimentConfig c = config;
    c.sweep.reset();
    const auto& param = config.sweep->parameter;
    if (param == "lambda") c.lambda = v;
    if (param == "gamma") c.gamma = v;
    if (param == "reg_weight") c.reg_weight = v;
    if (param == "sigma2") c.sigma2 = v;
    points.push_back({v, run_experiment(c)});
  }
  return points;
}

namespace {

void append_summary_rows(std::string& out, const ExperimentResult& r, const std::string& prefix) {
  for (const auto& mat : r.matrices) {
    const auto& qs = r.report.q.at(mat.method);
    const double mean = r.report.mean_error.at(mat.method);
    for (std::size_t i = 0; i < r.report.deltas.size(); ++i) {
      out += fmt::format("{}{},{},{},{}\n", prefix, mat.method, num(r.report.deltas[i]), num(qs[i]),
                         num(mean));
    }
  }
}

void append_curve_rows(std::string& out, const ExperimentResult& r, const std::string& prefix) {
  for (const auto& mat : r.matrices) {
    if (mat.trajectories.empty()) continue;
    for (const auto& pt : convergence_curve(mat.trajectories)) {
      out += fmt::format("{}{},{},{},{}\n", prefix, mat.method, pt.t, num(pt.mean_error),
                         num(pt.q99_error));
    }
  }
}

class AtomicWriter {
 public:
  explicit AtomicWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}
  ~AtomicWriter() {
    if (!committed_) rollback();
  }

  void stage(const std::string& name, const std::string& contents) {
    const auto tmp = dir_ / (name + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot create " + tmp.string());
    staged_.emplace_back(tmp, dir_ / name);
    out << contents;
    out.close();
    if (!out) throw std::runtime_error("failed to write " + tmp.string());
  }

  void commit() {
    for (const auto& [tmp, dest] : staged_) {
      std::filesystem::rename(tmp, dest);
      renamed_.push_back(dest);
    }
    committed_ = true;
  }

 private:
  void rollback() noexcept {
    std::error_code ec;
    for (const auto& [tmp, dest] : staged_) std::filesystem::remove(tmp, ec);
    for (const auto& dest : renamed_) std::filesystem::remove(dest, ec);
  }

  std::filesystem::path dir_;
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
  std::vector<std::filesystem::path> renamed_;
  bool committed_ = false;
};

}  // namespace

std::string summary_csv(const ExperimentResult& result) {
  std::string out = "method,delta,q_delta,mean_error\n";
  append_summary_rows(out, result, "");
  return out;
}

std::string curves_csv(const ExperimentResult& result) {
  std::string out = "method,t,mean_error,q99_error\n";
  append_curve_rows(out, result, "");
  return out;
}

std::string sweep_summary_csv(const std::vector<SweepPoint>& sweep, const std::string& key) {
  std::string out = key + ",method,delta,q_delta,mean_error\n";
  for (const auto& pt : sweep) append_summary_rows(out, pt.result, num(pt.value) + ",");
  return out;
}

std::string sweep_curves_csv(const std::vector<SweepPoint>& sweep, const std::string& key) {
  std::string out = key + ",method,t,mean_error,q99_error\n";
  for (const auto& pt : sweep) append_curve_rows(out, pt.result, num(pt.value) + ",");
  return out;
}

void write_results(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  AtomicWriter writer(out_dir);
  writer.stage("summary.csv", summary_csv(result));
  if (result.config.curves) writer.stage("curves.csv", curves_csv(result));
  writer.stage("config.resolved.json", result.resolved_json.dump(2) + "\n");
  writer.commit();
}

void write_sweep_results(const std::vector<SweepPoint>& sweep, const ExperimentConfig& config,
                         const std::filesystem::path& out_dir) {
  if (!config.sweep) throw std::invalid_argument("config has no sweep");
  const auto& key = config.sweep->parameter;
  nlohmann::json rj;
  rj["config"] = to_json(config);
  rj["points"] = nlohmann::json::array();
  for (const auto& pt : sweep) {
    rj["points"].push_back({{key, pt.value}, {"resolved", pt.result.resolved_json}});
  }
  std::filesystem::create_directories(out_dir);
  AtomicWriter writer(out_dir);
  writer.stage("summary.csv", sweep_summary_csv(sweep, key));
  if (config.curves) writer.stage("curves.csv", sweep_curves_csv(sweep, key));
  writer.stage("config.resolved.json", rj.dump(2) + "\n");
  writer.commit();
}

}  // namespace heavytail
