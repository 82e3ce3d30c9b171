#pragma once

#include "heavytail/rng.hpp"
#include "heavytail/types.hpp"

#include <cstddef>
#include <optional>
#include <variant>

namespace heavytail {

/// Raw Pareto moments for minimum 1 and shape `tail`.
double pareto_raw_mean(double tail);
double pareto_raw_variance(double tail);
/// Kurtosis E[(X-m)^4]/Var^2; empty when the fourth moment does not exist (tail <= 4).
std::optional<double> pareto_kurtosis(double tail);

/// Inverse CDF of the raw Pareto: u^(-1/tail) for u in (0, 1].
double pareto_inverse_cdf(double tail, double u);

/// Pareto(minimum 1, shape tail) affinely mapped to a given mean and standard deviation.
class ParetoSpec {
 public:
  /// Throws std::invalid_argument unless tail > 2 and stddev >= 0.
  explicit ParetoSpec(double tail, double mean = 0.0, double stddev = 1.0);

  double tail() const noexcept { return tail_; }
  double mean() const noexcept { return mean_; }
  double stddev() const noexcept { return stddev_; }
  double raw_mean() const noexcept { return raw_mean_; }
  double raw_stddev() const noexcept { return raw_stddev_; }

  double standardize(double raw) const noexcept {
    return (raw - raw_mean_) / raw_stddev_ * stddev_ + mean_;
  }

 private:
  double tail_;
  double mean_;
  double stddev_;
  double raw_mean_;
  double raw_stddev_;
};

double pareto_standardized(const ParetoSpec& spec, CounterRng& rng);

enum class NoiseFamily { pareto, gaussian };

/// x = mu + z with i.i.d. unit-variance coordinates z.
struct MeanTaskSpec {
  Vector true_mean;
  double tail = 2.1;
  NoiseFamily family = NoiseFamily::pareto;
  Vector initial;

  /// Zero true mean, initial point (1,...,1)/sqrt(p).
  static MeanTaskSpec standard(std::size_t p, double tail = 2.1,
                               NoiseFamily family = NoiseFamily::pareto);
  std::size_t dim() const { return static_cast<std::size_t>(true_mean.size()); }
  double trace_covariance() const { return static_cast<double>(dim()); }
};

/// y = <x, theta*> + w, standardized Pareto covariates and noise.
struct RegressionTaskSpec {
  Vector true_param;
  double covariate_tail = 4.1;
  double noise_tail = 2.1;
  double noise_variance = 0.75;
  Vector initial;

  /// theta* = (1,...,1)/sqrt(p), initial point 0.
  static RegressionTaskSpec dense(std::size_t p, double noise_variance = 0.75,
                                  double covariate_tail = 4.1, double noise_tail = 2.1);
  /// theta* = (1/sqrt(r),...,1/sqrt(r),0,...,0), initial point -(1,...,1)/sqrt(p).
  static RegressionTaskSpec sparse(std::size_t p, std::size_t r, double noise_variance = 0.75,
                                   double covariate_tail = 4.1, double noise_tail = 2.1);
  std::size_t dim() const { return static_cast<std::size_t>(true_param.size()); }
};

/// Bernoulli labels with P(y=1|x) = sigmoid(<x, theta*>).
struct LogisticTaskSpec {
  Vector true_param;
  double covariate_tail = 4.1;
  double radius = 1.0;
  double tau_l = 0.1;
  Vector initial;

  /// theta* = (1,...,1)/sqrt(p), initial point 0.75 theta*.
  static LogisticTaskSpec standard(std::size_t p, double covariate_tail = 4.1);
  std::size_t dim() const { return static_cast<std::size_t>(true_param.size()); }
};

using TaskSpec = std::variant<MeanTaskSpec, RegressionTaskSpec, LogisticTaskSpec>;

/// Checks tails, dimensions and variances; throws std::invalid_argument.
void validate(const TaskSpec& task);

/// Standardized i.i.d. coordinates (Pareto or Gaussian) with unit variance.
Vector standardized_vector(std::size_t p, double tail, NoiseFamily family, CounterRng& rng);

Vector gen_mean_sample(const MeanTaskSpec& spec, CounterRng& rng);
Sample gen_regression_sample(const RegressionTaskSpec& spec, CounterRng& rng);
Sample gen_logistic_sample(const LogisticTaskSpec& spec, CounterRng& rng);
/// Label draw for a fixed covariate.
double draw_logistic_label(double margin, CounterRng& rng);

Sample draw_sample(const TaskSpec& task, CounterRng& rng);
std::size_t task_dim(const TaskSpec& task);
const Vector& task_true_param(const TaskSpec& task);
const Vector& task_initial(const TaskSpec& task);

double sigmoid(double z) noexcept;

}  // namespace heavytail
