#include "heavytail/distributions.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace heavytail {

namespace {

void require_tail(double tail, const char* what) {
  if (!(tail > 2.0) || !std::isfinite(tail)) {
    throw std::invalid_argument(std::string(what) + " must be a finite value > 2 (got " +
                                std::to_string(tail) + ")");
  }
}

}  // namespace

double pareto_raw_mean(double tail) { return tail / (tail - 1.0); }

double pareto_raw_variance(double tail) {
  return tail / ((tail - 1.0) * (tail - 1.0) * (tail - 2.0));
}

std::optional<double> pareto_kurtosis(double tail) {
  if (!(tail > 4.0)) return std::nullopt;
  // Central fourth moment from the raw moments E[X^k] = tail / (tail - k).
  const double m1 = tail / (tail - 1.0);
  const double m2 = tail / (tail - 2.0);
  const double m3 = tail / (tail - 3.0);
  const double m4 = tail / (tail - 4.0);
  const double mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
  const double var = pareto_raw_variance(tail);
  return mu4 / (var * var);
}

double pareto_inverse_cdf(double tail, double u) { return std::pow(u, -1.0 / tail); }

ParetoSpec::ParetoSpec(double tail, double mean, double stddev)
    : tail_(tail), mean_(mean), stddev_(stddev) {
  require_tail(tail, "Pareto tail parameter");
  if (!(stddev >= 0.0)) throw std::invalid_argument("Pareto target stddev must be >= 0");
  raw_mean_ = pareto_raw_mean(tail);
  raw_stddev_ = std::sqrt(pareto_raw_variance(tail));
}

double pareto_standardized(const ParetoSpec& spec, CounterRng& rng) {
  return spec.standardize(pareto_inverse_cdf(spec.tail(), rng.uniform_open_closed()));
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

MeanTaskSpec MeanTaskSpec::standard(std::size_t p, double tail, NoiseFamily family) {
  MeanTaskSpec spec;
  spec.true_mean = Vector::Zero(static_cast<Index>(p));
  spec.tail = tail;
  spec.family = family;
  spec.initial = Vector::Constant(static_cast<Index>(p), 1.0 / std::sqrt(static_cast<double>(p)));
  return spec;
}

RegressionTaskSpec RegressionTaskSpec::dense(std::size_t p, double noise_variance,
                                             double covariate_tail, double noise_tail) {
  RegressionTaskSpec spec;
  const auto dim = static_cast<Index>(p);
  spec.true_param = Vector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(p)));
  spec.covariate_tail = covariate_tail;
  spec.noise_tail = noise_tail;
  spec.noise_variance = noise_variance;
  spec.initial = Vector::Zero(dim);
  return spec;
}

RegressionTaskSpec RegressionTaskSpec::sparse(std::size_t p, std::size_t r, double noise_variance,
                                              double covariate_tail, double noise_tail) {
  if (r == 0 || r > p) throw std::invalid_argument("sparsity must satisfy 1 <= r <= p");
  RegressionTaskSpec spec = dense(p, noise_variance, covariate_tail, noise_tail);
  spec.true_param.setZero();
  spec.true_param.head(static_cast<Index>(r)).setConstant(1.0 / std::sqrt(static_cast<double>(r)));
  spec.initial.setConstant(-1.0 / std::sqrt(static_cast<double>(p)));
  return spec;
}

LogisticTaskSpec LogisticTaskSpec::standard(std::size_t p, double covariate_tail) {
  LogisticTaskSpec spec;
  spec.true_param =
      Vector::Constant(static_cast<Index>(p), 1.0 / std::sqrt(static_cast<double>(p)));
  spec.covariate_tail = covariate_tail;
  spec.initial = 0.75 * spec.true_param;
  return spec;
}

void validate(const TaskSpec& task) {
  std::visit(
      [](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, MeanTaskSpec>) {
          if (spec.true_mean.size() == 0) throw std::invalid_argument("dimension must be >= 1");
          if (spec.family == NoiseFamily::pareto) require_tail(spec.tail, "tail parameter");
          if (spec.initial.size() != spec.true_mean.size())
            throw std::invalid_argument("initial point has the wrong dimension");
        } else if constexpr (std::is_same_v<T, RegressionTaskSpec>) {
          if (spec.true_param.size() == 0) throw std::invalid_argument("dimension must be >= 1");
          require_tail(spec.covariate_tail, "covariate tail parameter");
          require_tail(spec.noise_tail, "noise tail parameter");
          if (!(spec.noise_variance >= 0.0))
            throw std::invalid_argument("noise variance must be >= 0");
          if (spec.initial.size() != spec.true_param.size())
            throw std::invalid_argument("initial point has the wrong dimension");
        } else {
          if (spec.true_param.size() == 0) throw std::invalid_argument("dimension must be >= 1");
          require_tail(spec.covariate_tail, "covariate tail parameter");
          if (!(spec.radius > 0.0)) throw std::invalid_argument("domain radius must be > 0");
          if (!(spec.tau_l > 0.0)) throw std::invalid_argument("tau_l must be > 0");
          if (spec.initial.size() != spec.true_param.size())
            throw std::invalid_argument("initial point has the wrong dimension");
        }
      },
      task);
}

Vector standardized_vector(std::size_t p, double tail, NoiseFamily family, CounterRng& rng) {
  Vector z(static_cast<Index>(p));
  if (family == NoiseFamily::gaussian) {
    std::normal_distribution<double> normal;
    for (Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    return z;
  }
  const ParetoSpec spec(tail);
  for (Index i = 0; i < z.size(); ++i) z[i] = pareto_standardized(spec, rng);
  return z;
}

Vector gen_mean_sample(const MeanTaskSpec& spec, CounterRng& rng) {
  return spec.true_mean + standardized_vector(spec.dim(), spec.tail, spec.family, rng);
}

Sample gen_regression_sample(const RegressionTaskSpec& spec, CounterRng& rng) {
  Sample s;
  s.x = standardized_vector(spec.dim(), spec.covariate_tail, NoiseFamily::pareto, rng);
  const ParetoSpec noise(spec.noise_tail, 0.0, std::sqrt(spec.noise_variance));
  s.y = s.x.dot(spec.true_param) + pareto_standardized(noise, rng);
  return s;
}

double draw_logistic_label(double margin, CounterRng& rng) {
  return rng.uniform_open_closed() <= sigmoid(margin) ? 1.0 : 0.0;
}

Sample gen_logistic_sample(const LogisticTaskSpec& spec, CounterRng& rng) {
  Sample s;
  s.x = standardized_vector(spec.dim(), spec.covariate_tail, NoiseFamily::pareto, rng);
  s.y = draw_logistic_label(s.x.dot(spec.true_param), rng);
  return s;
}

Sample draw_sample(const TaskSpec& task, CounterRng& rng) {
  return std::visit(
      [&rng](const auto& spec) -> Sample {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, MeanTaskSpec>) {
          return Sample{gen_mean_sample(spec, rng), 0.0};
        } else if constexpr (std::is_same_v<T, RegressionTaskSpec>) {
          return gen_regression_sample(spec, rng);
        } else {
          return gen_logistic_sample(spec, rng);
        }
      },
      task);
}

std::size_t task_dim(const TaskSpec& task) {
  return std::visit([](const auto& spec) { return spec.dim(); }, task);
}

const Vector& task_true_param(const TaskSpec& task) {
  return std::visit(
      [](const auto& spec) -> const Vector& {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, MeanTaskSpec>) {
          return spec.true_mean;
        } else {
          return spec.true_param;
        }
      },
      task);
}

const Vector& task_initial(const TaskSpec& task) {
  return std::visit([](const auto& spec) -> const Vector& { return spec.initial; }, task);
}

}  // namespace heavytail
