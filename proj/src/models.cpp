#include "heavytail/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heavytail {

void RegularityConstants::validate() const {
  if (!(tau_l > 0.0)) throw std::invalid_argument("tau_l must be > 0");
  if (!(tau_u >= tau_l)) throw std::invalid_argument("tau_u must be >= tau_l");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
}

Domain Domain::ball(Vector center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be > 0");
  Domain d;
  d.center_ = std::move(center);
  d.radius_ = radius;
  return d;
}

bool Domain::contains(const Vector& theta, double slack) const {
  if (!is_ball()) return true;
  return (theta - center_).norm() <= *radius_ * (1.0 + slack);
}

Vector project(const Domain& domain, const Vector& theta) {
  if (!domain.is_ball()) return theta;
  const Vector offset = theta - domain.center();
  const double dist = offset.norm();
  if (dist <= domain.radius()) return theta;
  return domain.center() + offset * (domain.radius() / dist);
}

LossModel::LossModel(RegularityConstants constants, Domain domain, Vector true_param,
                     Vector initial)
    : constants_(std::move(constants)),
      domain_(std::move(domain)),
      true_param_(std::move(true_param)),
      initial_(std::move(initial)) {}

Vector LossModel::huber_grad(const Vector&, const Sample&, double) const {
  throw std::invalid_argument("the huber regularizer requires a regression model");
}

namespace {

class MeanModel final : public LossModel {
 public:
  MeanModel(RegularityConstants c, Domain d, Vector truth, Vector init)
      : LossModel(std::move(c), std::move(d), std::move(truth), std::move(init)) {}

  double loss(const Vector& theta, const Sample& s) const override {
    return 0.5 * (s.x - theta).squaredNorm();
  }
  Vector grad(const Vector& theta, const Sample& s) const override { return theta - s.x; }
  double risk_gap(const Vector& theta) const override {
    return 0.5 * (theta - true_param()).squaredNorm();
  }
  Vector risk_grad(const Vector& theta) const override { return theta - true_param(); }
};

class RegressionModel final : public LossModel {
 public:
  RegressionModel(RegularityConstants c, Domain d, Vector truth, Vector init)
      : LossModel(std::move(c), std::move(d), std::move(truth), std::move(init)) {}

  double loss(const Vector& theta, const Sample& s) const override {
    const double r = s.y - s.x.dot(theta);
    return 0.5 * r * r;
  }
  Vector grad(const Vector& theta, const Sample& s) const override {
    return -(s.y - s.x.dot(theta)) * s.x;
  }
  // Sigma = I for standardized covariates.
  double risk_gap(const Vector& theta) const override {
    return 0.5 * (theta - true_param()).squaredNorm();
  }
  Vector risk_grad(const Vector& theta) const override { return theta - true_param(); }

  bool supports_huber() const override { return true; }
  Vector huber_grad(const Vector& theta, const Sample& s, double kappa) const override {
    const double r = std::clamp(s.y - s.x.dot(theta), -kappa, kappa);
    return -r * s.x;
  }
};

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

class LogisticModel final : public LossModel {
 public:
  LogisticModel(RegularityConstants constants, Domain domain, Vector true_param, Vector initial,
                Eigen::MatrixXd covariates)
      : LossModel(std::move(constants), std::move(domain), std::move(true_param),
                  std::move(initial)),
        covariates_(std::move(covariates)) {
    true_prob_ = (covariates_.transpose() * this->true_param()).unaryExpr(&sigmoid);
  }

  double loss(const Vector& theta, const Sample& s) const override {
    const double z = s.x.dot(theta);
    return -s.y * z + softplus(z);
  }
  Vector grad(const Vector& theta, const Sample& s) const override {
    return (sigmoid(s.x.dot(theta)) - s.y) * s.x;
  }
  // E_y[loss] = -sigmoid(<x,theta*>) z + softplus(z); averaged over the fixed covariates.
  double risk_gap(const Vector& theta) const override {
    const Vector z = covariates_.transpose() * theta;
    const Vector z_star = covariates_.transpose() * true_param();
    double total = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
      total += (-true_prob_[i] * z[i] + softplus(z[i])) -
               (-true_prob_[i] * z_star[i] + softplus(z_star[i]));
    }
    return total / static_cast<double>(z.size());
  }
  Vector risk_grad(const Vector& theta) const override {
    const Vector z = covariates_.transpose() * theta;
    const Vector weights = z.unaryExpr(&sigmoid) - true_prob_;
    return covariates_ * weights / static_cast<double>(z.size());
  }

 private:
  Eigen::MatrixXd covariates_;
  Vector true_prob_;
};

}  // namespace

LossModelPtr mean_model(const MeanTaskSpec& spec) {
  validate(TaskSpec{spec});
  RegularityConstants c;
  c.tau_l = c.tau_u = 1.0;
  c.alpha = 0.0;
  c.beta = spec.trace_covariance();
  return std::make_shared<MeanModel>(c, Domain::unconstrained(), spec.true_mean, spec.initial);
}

LossModelPtr regression_model(const RegressionTaskSpec& spec) {
  validate(TaskSpec{spec});
  const double p = static_cast<double>(spec.dim());
  const double sigma_norm = 1.0;  // ||Sigma||_2 = lambda_min(Sigma) = 1
  RegularityConstants c;
  c.tau_l = 1.0;
  c.tau_u = sigma_norm;
  c.c4 = pareto_kurtosis(spec.covariate_tail);
  c.alpha = c.c4 ? 2.0 * p * (*c.c4 + 1.0) * sigma_norm * sigma_norm
                 : std::numeric_limits<double>::infinity();
  c.beta = p * spec.noise_variance * sigma_norm;
  return std::make_shared<RegressionModel>(c, Domain::unconstrained(), spec.true_param,
                                           spec.initial);
}

LossModelPtr logistic_model(const LogisticTaskSpec& spec, std::size_t integration_samples,
                            std::uint64_t integration_seed) {
  validate(TaskSpec{spec});
  if (integration_samples == 0) throw std::invalid_argument("integration_samples must be >= 1");
  // Hessian E[s(1-s) x x^T] <= Sigma / 4; |sigmoid - y| <= 1 bounds the noise by tr(Sigma).
  RegularityConstants c;
  c.tau_l = spec.tau_l;
  c.tau_u = std::max(0.25, spec.tau_l);
  c.alpha = 0.0;
  c.beta = static_cast<double>(spec.dim());

  CounterRng rng(integration_seed, 0);
  Eigen::MatrixXd covariates(static_cast<Index>(spec.dim()), static_cast<Index>(integration_samples));
  for (Index j = 0; j < covariates.cols(); ++j) {
    covariates.col(j) = standardized_vector(spec.dim(), spec.covariate_tail, NoiseFamily::pareto, rng);
  }
  return std::make_shared<LogisticModel>(c, Domain::ball(spec.true_param, spec.radius),
                                         spec.true_param, spec.initial, std::move(covariates));
}

LossModelPtr make_model(const TaskSpec& task) {
  return std::visit(
      [](const auto& spec) -> LossModelPtr {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, MeanTaskSpec>) {
          return mean_model(spec);
        } else if constexpr (std::is_same_v<T, RegressionTaskSpec>) {
          return regression_model(spec);
        } else {
          return logistic_model(spec);
        }
      },
      task);
}

double estimate_fourth_moment_ratio(double tail, std::size_t draws, CounterRng& rng) {
  const ParetoSpec spec(tail);
  double m2 = 0.0;
  double m4 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double z = pareto_standardized(spec, rng);
    const double z2 = z * z;
    m2 += z2;
    m4 += z2 * z2;
  }
  m2 /= static_cast<double>(draws);
  m4 /= static_cast<double>(draws);
  return m4 / (m2 * m2);
}

}  // namespace heavytail
