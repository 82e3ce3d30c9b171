#include "heavytail/batch_baselines.hpp"
#include "heavytail/harness.hpp"
#include "heavytail/metrics.hpp"
#include "heavytail/optimizer.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
namespace ht = heavytail;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ht::ExperimentConfig parse_config(const std::string& json_text) {
  return ht::config_from_json(nlohmann::json::parse(json_text));
}

std::vector<ht::Vector> rows_of(const RowMatrix& x) {
  std::vector<ht::Vector> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.emplace_back(x.row(i).transpose());
  return out;
}

py::dict theory_dict(const ht::TheoryOutputs& out) {
  py::dict d;
  d["gamma"] = out.gamma;
  d["lambda"] = out.lambda;
  d["error_bound"] = out.error_bound;
  return d;
}

py::tuple sample_task(const std::string& config_json, std::size_t n, std::uint64_t seed,
                      std::uint64_t stream) {
  const auto task = ht::build_task(parse_config(config_json));
  ht::CounterRng rng(seed, stream);
  const auto p = static_cast<Eigen::Index>(ht::task_dim(task));
  RowMatrix x(static_cast<Eigen::Index>(n), p);
  ht::Vector y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto s = ht::draw_sample(task, rng);
    x.row(i) = s.x.transpose();
    y(i) = s.y;
  }
  return py::make_tuple(x, y);
}

py::tuple run_sgd(const std::string& config_json, const RowMatrix& x, const ht::Vector& y,
                  double gamma, std::optional<double> lambda, const std::string& regularizer,
                  double reg_weight, bool trajectory) {
  const auto task = ht::build_task(parse_config(config_json));
  const auto model = ht::make_model(task);
  if (x.cols() != static_cast<Eigen::Index>(model->dim()))
    throw std::invalid_argument("x has the wrong number of columns for this task");
  if (y.size() != x.rows()) throw std::invalid_argument("x and y have different lengths");

  ht::OptimizerConfig c;
  c.schedule = ht::StepSchedule(model->constants().tau_l, gamma);
  c.clip_level = lambda;
  c.record_trajectory = trajectory;
  if (regularizer == "ridge") {
    c.regularizer = ht::Regularizer::ridge(reg_weight);
  } else if (regularizer == "lasso") {
    c.regularizer = ht::Regularizer::lasso(reg_weight);
  } else if (regularizer == "huber") {
    c.regularizer = ht::Regularizer::huber(reg_weight);
  } else if (regularizer != "none") {
    throw std::invalid_argument("regularizer must be none, ridge, lasso or huber");
  }

  std::vector<ht::Sample> samples;
  samples.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) samples.push_back({x.row(i).transpose(), y(i)});
  ht::BufferStream stream(samples);
  ht::RunResult r;
  {
    py::gil_scoped_release release;
    r = ht::run(model, c, stream, samples.size());
  }
  py::object traj = py::none();
  if (r.l2_error_trajectory) traj = py::cast(*r.l2_error_trajectory);
  return py::make_tuple(r.final_param, traj);
}

py::dict run_experiment(const std::string& config_json) {
  const auto config = parse_config(config_json);
  ht::ExperimentResult r;
  {
    py::gil_scoped_release release;
    r = ht::run_experiment(config);
  }
  py::dict errors;
  for (const auto& m : r.matrices) errors[py::str(m.method)] = py::cast(m.final_errors);
  py::dict out;
  out["summary_csv"] = ht::summary_csv(r);
  out["curves_csv"] = ht::curves_csv(r);
  out["resolved_json"] = r.resolved_json.dump();
  out["errors"] = errors;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Clipped streaming SGD under heavy-tailed noise";

  py::register_exception<ht::StreamExhausted>(m, "StreamExhausted", PyExc_RuntimeError);

  m.def("clip", &ht::clip, py::arg("g"), py::arg("level"));

  m.def("quantile_loss",
        [](const std::vector<double>& errors, double delta) { return ht::quantile_loss(errors, delta); },
        py::arg("errors"), py::arg("delta"));

  m.def("median_of_means",
        [](const RowMatrix& x, std::size_t buckets, bool geometric) {
          ht::MoMConfig c;
          c.n_buckets = buckets;
          c.variant = geometric ? ht::MomVariant::geometric : ht::MomVariant::coordinate_wise;
          return ht::median_of_means(rows_of(x), c);
        },
        py::arg("x"), py::arg("buckets") = 24, py::arg("geometric") = false);

  m.def("geometric_median",
        [](const RowMatrix& x, double tol, std::size_t max_iter) {
          auto r = ht::geometric_median(rows_of(x), tol, max_iter);
          return py::make_tuple(r.point, r.iterations, r.converged);
        },
        py::arg("x"), py::arg("tol") = 1e-8, py::arg("max_iter") = 1000);

  m.def("theory_general",
        [](double tau_l, double tau_u, double alpha, double beta, std::size_t n, double delta,
           double init_error, double c1) {
          ht::TheoryInputs in;
          in.constants = {tau_l, tau_u, alpha, beta, std::nullopt};
          in.n = n;
          in.delta = delta;
          in.init_error = init_error;
          in.c1 = c1;
          return theory_dict(ht::general_hyperparams(in));
        },
        py::arg("tau_l"), py::arg("tau_u"), py::arg("alpha"), py::arg("beta"), py::arg("n"),
        py::arg("delta"), py::arg("init_error"), py::arg("c1") = 1.0);

  m.def("theory_mean",
        [](double trace, std::size_t n, double delta, double init_error, double c1) {
          return theory_dict(ht::mean_hyperparams(trace, n, delta, init_error, c1));
        },
        py::arg("trace_covariance"), py::arg("n"), py::arg("delta"), py::arg("init_error"),
        py::arg("c1") = 1.0);

  m.def("theory_regression",
        [](std::size_t p, double c4, double sigma2, std::size_t n, double delta, double init_error,
           double c1) {
          ht::TheoryInputs in;
          in.constants = {1.0, 1.0, 2.0 * static_cast<double>(p) * (c4 + 1.0),
                          static_cast<double>(p) * sigma2, c4};
          in.n = n;
          in.delta = delta;
          in.init_error = init_error;
          in.c1 = c1;
          return theory_dict(ht::regression_hyperparams(in, p, sigma2));
        },
        py::arg("p"), py::arg("c4"), py::arg("sigma2"), py::arg("n"), py::arg("delta"),
        py::arg("init_error"), py::arg("c1") = 1.0);

  m.def("freedman_bound", &ht::freedman_bound, py::arg("a"), py::arg("v"), py::arg("b"));

  m.def("_sample_task", &sample_task, py::arg("config_json"), py::arg("n"), py::arg("seed"),
        py::arg("stream"));
  m.def("_run_sgd", &run_sgd, py::arg("config_json"), py::arg("x"), py::arg("y"), py::arg("gamma"),
        py::arg("clip_level"), py::arg("regularizer"), py::arg("reg_weight"), py::arg("trajectory"));
  m.def("_run_experiment", &run_experiment, py::arg("config_json"));
  m.def("_validate_config",
        [](const std::string& text) {
          auto c = parse_config(text);
          c.validate();
          return ht::to_json(c).dump();
        },
        py::arg("config_json"));
}
