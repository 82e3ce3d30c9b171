#include "heavytail/models.hpp"
#include "heavytail/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace heavytail;

namespace {

Vector random_direction(Index p, CounterRng& rng) {
  Vector v(p);
  for (Index j = 0; j < p; ++j) v[j] = 2.0 * rng.uniform_open_closed() - 1.0;
  return v.normalized();
}

// Compares the sample average of stochastic gradients with risk_grad, coordinate
// by coordinate, against `k` standard errors (scaled by `se_factor`).
void expect_unbiased(const LossModel& model, const TaskSpec& task, const Vector& theta,
                     std::size_t n, double k, double se_factor = 1.0) {
  CounterRng rng(31, 4);
  const Index p = theta.size();
  Vector sum = Vector::Zero(p), sq = Vector::Zero(p);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector g = model.grad(theta, draw_sample(task, rng));
    sum += g;
    sq += g.cwiseProduct(g);
  }
  const Vector mean = sum / double(n);
  const Vector var = sq / double(n) - mean.cwiseProduct(mean);
  const Vector truth = model.risk_grad(theta);
  for (Index j = 0; j < p; ++j) {
    const double se = std::sqrt(var[j] / double(n)) * se_factor;
    EXPECT_NEAR(mean[j], truth[j], k * se) << "coordinate " << j;
  }
}

double noise_second_moment(const LossModel& model, const TaskSpec& task, const Vector& theta,
                           std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  const Vector truth = model.risk_grad(theta);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += (model.grad(theta, draw_sample(task, rng)) - truth).squaredNorm();
  }
  return total / double(n);
}

}  // namespace

TEST(MeanModel, GradientExamples) {
  const auto model = mean_model(MeanTaskSpec::standard(2));
  const Sample s{(Vector(2) << 3.0, -1.0).finished(), 0.0};
  EXPECT_TRUE(model->grad(s.x, s).isZero());
  EXPECT_EQ(model->grad(Vector::Zero(2), s), (Vector(2) << -3.0, 1.0).finished());
  EXPECT_DOUBLE_EQ(model->loss(Vector::Zero(2), s), 5.0);
}

TEST(MeanModel, ConstantsFromTrace) {
  const auto model = mean_model(MeanTaskSpec::standard(256));
  EXPECT_DOUBLE_EQ(model->constants().beta, 256.0);
  EXPECT_DOUBLE_EQ(model->constants().alpha, 0.0);
  EXPECT_DOUBLE_EQ(model->constants().tau_l, 1.0);
  EXPECT_DOUBLE_EQ(model->constants().tau_u, 1.0);
}

TEST(MeanModel, UnbiasedGradients) {
  const auto spec = MeanTaskSpec::standard(5);
  const auto model = mean_model(spec);
  CounterRng rng(1, 1);
  for (int rep = 0; rep < 5; ++rep) {
    expect_unbiased(*model, spec, 2.0 * random_direction(5, rng), 100000, 4.0);
  }
}

TEST(MeanModel, NoiseVarianceEqualsTrace) {
  // A light tail so the second-moment estimate concentrates.
  const auto spec = MeanTaskSpec::standard(6, 10.0);
  const auto model = mean_model(spec);
  for (double dist : {0.0, 1.0, 10.0}) {
    CounterRng rng(2, 2);
    const Vector theta = dist * random_direction(6, rng);
    const double m2 = noise_second_moment(*model, spec, theta, 200000, 3);
    EXPECT_NEAR(m2, model->constants().beta, 0.03 * model->constants().beta) << dist;
  }
}

TEST(RegressionModel, GradientExample) {
  const auto model = regression_model(RegressionTaskSpec::dense(2));
  const Sample s{(Vector(2) << 1.0, 0.0).finished(), 2.0};
  EXPECT_EQ(model->grad(Vector::Zero(2), s), (Vector(2) << -2.0, 0.0).finished());
  EXPECT_DOUBLE_EQ(model->loss(Vector::Zero(2), s), 2.0);
}

TEST(RegressionModel, ConstantsForStandardizedCovariates) {
  const auto model = regression_model(RegressionTaskSpec::dense(32, 0.75));
  const auto& c = model->constants();
  EXPECT_DOUBLE_EQ(c.beta, 24.0);
  EXPECT_DOUBLE_EQ(c.tau_l, 1.0);
  EXPECT_DOUBLE_EQ(c.tau_u, 1.0);
  ASSERT_TRUE(c.c4.has_value());
  EXPECT_DOUBLE_EQ(c.alpha, 2.0 * 32.0 * (*c.c4 + 1.0));
  EXPECT_DOUBLE_EQ(model->risk_gap(model->true_param()), 0.0);
}

TEST(RegressionModel, InfiniteAlphaWithoutFourthMoment) {
  const auto model = regression_model(RegressionTaskSpec::dense(4, 0.75, 3.0));
  EXPECT_FALSE(model->constants().c4.has_value());
  EXPECT_TRUE(std::isinf(model->constants().alpha));
}

TEST(RegressionModel, HuberClampsResidual) {
  const auto model = regression_model(RegressionTaskSpec::dense(2));
  const Sample s{(Vector(2) << 1.0, 2.0).finished(), 10.0};
  EXPECT_EQ(model->huber_grad(Vector::Zero(2), s, 1.0), (Vector(2) << -1.0, -2.0).finished());
  EXPECT_EQ(model->huber_grad(Vector::Zero(2), s, 100.0), model->grad(Vector::Zero(2), s));
  EXPECT_TRUE(model->supports_huber());
  EXPECT_FALSE(mean_model(MeanTaskSpec::standard(2))->supports_huber());
  EXPECT_THROW(mean_model(MeanTaskSpec::standard(2))->huber_grad(Vector::Zero(2), s, 1.0),
               std::invalid_argument);
}

TEST(RegressionModel, UnbiasedGradients) {
  const auto spec = RegressionTaskSpec::dense(4);
  const auto model = regression_model(spec);
  CounterRng rng(5, 5);
  for (int rep = 0; rep < 5; ++rep) {
    expect_unbiased(*model, spec, spec.true_param + random_direction(4, rng), 100000, 4.0);
  }
}

TEST(RegressionModel, NoiseVarianceContract) {
  // Exact value: ||d||^2 (kurtosis + p - 2) + p sigma^2 for theta = theta* + d.
  const std::size_t p = 5;
  for (double tail : {4.1, 9.0}) {
    const auto spec = RegressionTaskSpec::dense(p, 0.75, tail, 9.0);
    const auto model = regression_model(spec);
    const auto& c = model->constants();
    for (double dist : {0.0, 1.0, 10.0}) {
      CounterRng rng(7, 1);
      const Vector theta = spec.true_param + dist * random_direction(p, rng);
      const double exact = dist * dist * (*c.c4 + p - 2.0) + p * 0.75;
      const double bound = c.alpha * dist * dist + c.beta;
      EXPECT_LE(exact, bound + 1e-9);
      const double m2 = noise_second_moment(*model, spec, theta, 400000, 11);
      EXPECT_LE(m2, bound) << tail << " " << dist;
      // Only the light-tailed covariates have a concentrating estimate.
      if (tail > 8.0) EXPECT_NEAR(m2, exact, 0.05 * exact) << dist;
    }
  }
}

TEST(LogisticModel, GradientExamples) {
  const auto model = logistic_model(LogisticTaskSpec::standard(1), 1000);
  const Sample s{Vector::Constant(1, 1.0), 1.0};
  EXPECT_DOUBLE_EQ(model->grad(Vector::Zero(1), s)[0], -0.5);
  const Vector theta = Vector::Constant(1, 0.8);
  const Sample fractional{Vector::Constant(1, 1.5), sigmoid(1.2)};
  EXPECT_NEAR(model->grad(theta, fractional)[0], 0.0, 1e-15);
}

TEST(LogisticModel, GradientMatchesFiniteDifferences) {
  const auto model = logistic_model(LogisticTaskSpec::standard(3), 1000);
  CounterRng rng(13, 0);
  const double h = 1e-5;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector theta = 2.0 * random_direction(3, rng) * rng.uniform_open_closed();
    const Sample s{3.0 * random_direction(3, rng), rng.uniform_open_closed()};
    const Vector g = model->grad(theta, s);
    for (Index j = 0; j < 3; ++j) {
      Vector e = Vector::Zero(3);
      e[j] = h;
      const double fd = (model->loss(theta + e, s) - model->loss(theta - e, s)) / (2 * h);
      EXPECT_NEAR(g[j], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(LogisticModel, RiskGradientMatchesFiniteDifferences) {
  const auto spec = LogisticTaskSpec::standard(3);
  const auto model = logistic_model(spec, 20000);
  CounterRng rng(14, 0);
  const double h = 1e-5;
  for (int rep = 0; rep < 5; ++rep) {
    const Vector theta = spec.true_param + random_direction(3, rng) * rng.uniform_open_closed();
    const Vector g = model->risk_grad(theta);
    for (Index j = 0; j < 3; ++j) {
      Vector e = Vector::Zero(3);
      e[j] = h;
      const double fd = (model->risk_gap(theta + e) - model->risk_gap(theta - e)) / (2 * h);
      EXPECT_NEAR(g[j], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
  EXPECT_NEAR(model->risk_gap(spec.true_param), 0.0, 1e-15);
  EXPECT_LT(model->risk_grad(spec.true_param).norm(), 0.02);
}

TEST(LogisticModel, UnbiasedAgainstIntegratedRisk) {
  // Two independent Monte-Carlo estimates (1e5 fresh draws, 5e4 integration
  // covariates): the difference has about sqrt(3) times the fresh-sample error.
  const auto spec = LogisticTaskSpec::standard(3);
  const auto model = logistic_model(spec, 50000);
  CounterRng rng(15, 0);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector theta = spec.true_param + 0.9 * random_direction(3, rng);
    expect_unbiased(*model, spec, theta, 100000, 4.0, std::sqrt(3.0));
  }
}

TEST(LogisticModel, BallDomainAndConstants) {
  const auto spec = LogisticTaskSpec::standard(4);
  const auto model = logistic_model(spec, 100);
  EXPECT_TRUE(model->domain().is_ball());
  EXPECT_DOUBLE_EQ(model->domain().radius(), 1.0);
  EXPECT_DOUBLE_EQ(model->constants().tau_l, 0.1);
  EXPECT_GE(model->constants().tau_u, model->constants().tau_l);
  EXPECT_TRUE(model->domain().contains(model->initial_param()));
}

TEST(Domain, ProjectionExamples) {
  const Vector a = (Vector(2) << 2.0, 0.0).finished();
  const Vector b = (Vector(2) << 0.3, 0.4).finished();
  EXPECT_EQ(project(Domain::unconstrained(), a), a);
  const auto ball = Domain::ball(Vector::Zero(2), 1.0);
  EXPECT_EQ(project(ball, a), (Vector(2) << 1.0, 0.0).finished());
  EXPECT_EQ(project(ball, b), b);
  EXPECT_THROW(Domain::ball(Vector::Zero(2), 0.0), std::invalid_argument);
}

TEST(RegularityConstants, Validation) {
  RegularityConstants c;
  EXPECT_NO_THROW(c.validate());
  c.tau_u = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.beta = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(FourthMoment, RatioEstimateForLightTail) {
  CounterRng rng(19, 0);
  const double estimate = estimate_fourth_moment_ratio(12.0, 1000000, rng);
  EXPECT_NEAR(estimate, *pareto_kurtosis(12.0), 0.05 * *pareto_kurtosis(12.0));
}
