#pragma once

#include "heavytail/distributions.hpp"
#include "heavytail/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <optional>

namespace heavytail {

/// Curvature bounds tau_l <= tau_u and the gradient-noise bound
///   E||grad - grad R||^2 <= alpha ||theta - theta*||^2 + beta.
struct RegularityConstants {
  double tau_l = 1.0;
  double tau_u = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  /// Fourth-moment constant of the covariates, when it exists.
  std::optional<double> c4;

  /// Throws std::invalid_argument on tau_l <= 0, tau_u < tau_l, or negative alpha/beta.
  void validate() const;
};

/// Feasible set: all of R^p or a closed Euclidean ball.
class Domain {
 public:
  static Domain unconstrained() { return Domain(); }
  static Domain ball(Vector center, double radius);

  bool is_ball() const noexcept { return radius_.has_value(); }
  const Vector& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_.value_or(0.0); }
  bool contains(const Vector& theta, double slack = 1e-12) const;

 private:
  Domain() = default;

  Vector center_;
  std::optional<double> radius_;
};

/// Euclidean projection onto the domain.
Vector project(const Domain& domain, const Vector& theta);

/// Per-sample loss and gradient together with the population quantities that are
/// available in closed form for the synthetic tasks (theta* is known).
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual double loss(const Vector& theta, const Sample& s) const = 0;
  virtual Vector grad(const Vector& theta, const Sample& s) const = 0;
  /// R(theta) - R(theta*).
  virtual double risk_gap(const Vector& theta) const = 0;
  /// Gradient of the population risk.
  virtual Vector risk_grad(const Vector& theta) const = 0;

  /// Regression gradient with the residual clamped to [-kappa, kappa].
  virtual bool supports_huber() const { return false; }
  virtual Vector huber_grad(const Vector& theta, const Sample& s, double kappa) const;

  const RegularityConstants& constants() const noexcept { return constants_; }
  const Domain& domain() const noexcept { return domain_; }
  const Vector& true_param() const noexcept { return true_param_; }
  const Vector& initial_param() const noexcept { return initial_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(true_param_.size()); }

 protected:
  LossModel(RegularityConstants constants, Domain domain, Vector true_param, Vector initial);

 private:
  RegularityConstants constants_;
  Domain domain_;
  Vector true_param_;
  Vector initial_;
};

using LossModelPtr = std::shared_ptr<const LossModel>;

/// 0.5 ||x - theta||^2; tau_l = tau_u = 1, alpha = 0, beta = tr(Sigma).
LossModelPtr mean_model(const MeanTaskSpec& spec);

/// 0.5 (y - <x, theta>)^2 with Sigma = I.
/// alpha = 2p(C4 + 1)||Sigma||^2 and beta = p sigma^2 ||Sigma||. C4 is the covariate
/// kurtosis; when the fourth moment is infinite alpha is +inf and c4 is empty.
LossModelPtr regression_model(const RegressionTaskSpec& spec);

/// Logistic negative log-likelihood on the ball of radius r around theta*.
///
/// The population risk has no closed form for Pareto covariates, so risk_gap and
/// risk_grad average the exact conditional expectation over a fixed set of
/// `integration_samples` covariates drawn from stream `integration_seed`.
LossModelPtr logistic_model(const LogisticTaskSpec& spec, std::size_t integration_samples = 50000,
                            std::uint64_t integration_seed = 0x5eed);

LossModelPtr make_model(const TaskSpec& task);

/// Monte-Carlo estimate of max over coordinate axes of E[z^4] / E[z^2]^2 for the
/// standardized Pareto. Only meaningful when the eighth moment exists.
double estimate_fourth_moment_ratio(double tail, std::size_t draws, CounterRng& rng);

}  // namespace heavytail
