#include "heavytail/metrics.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace heavytail;

TEST(QuantileLoss, Examples) {
  std::vector<double> hundred(100);
  std::iota(hundred.begin(), hundred.end(), 1.0);
  EXPECT_EQ(quantile_loss(hundred, 0.01), 99.0);
  EXPECT_EQ(quantile_loss(std::vector{4.0, 2.0, 3.0, 1.0}, 0.5), 2.0);
  for (double d : {0.001, 0.3, 0.999}) EXPECT_EQ(quantile_loss(std::vector(7, 2.5), d), 2.5);
}

TEST(QuantileLoss, BoundaryDeltas) {
  std::vector<double> ten(10);
  std::iota(ten.begin(), ten.end(), 1.0);
  // (1 - 0.7) * 10 is 3.0000000000000004 in floating point; exceedance 7/10 <= 0.7 still holds at 3.
  EXPECT_EQ(quantile_loss(ten, 0.7), 3.0);
  EXPECT_EQ(quantile_loss(ten, 0.1), 9.0);
  EXPECT_EQ(quantile_loss(ten, 0.09), 10.0);
}

TEST(QuantileLoss, Errors) {
  EXPECT_THROW(quantile_loss(std::vector<double>{}, 0.1), std::invalid_argument);
  EXPECT_THROW(quantile_loss(std::vector{1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(quantile_loss(std::vector{1.0}, 1.0), std::invalid_argument);
}

TEST(ConvergenceCurve, SingleAndPair) {
  const std::vector<std::vector<double>> one{{3.0, 2.0, 1.0}};
  const auto c1 = convergence_curve(one);
  ASSERT_EQ(c1.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(c1[t].t, t + 1);
    EXPECT_EQ(c1[t].mean_error, one[0][t]);
    EXPECT_EQ(c1[t].q99_error, one[0][t]);
  }
  const std::vector<std::vector<double>> two{{1.0, 4.0}, {3.0, 2.0}};
  const auto c2 = convergence_curve(two);
  EXPECT_EQ(c2[0].mean_error, 2.0);
  EXPECT_EQ(c2[1].mean_error, 3.0);
  EXPECT_EQ(c2[0].q99_error, 3.0);
  EXPECT_EQ(c2[1].q99_error, 4.0);
}

TEST(ConvergenceCurve, RaggedRejected) {
  const std::vector<std::vector<double>> ragged{{1.0, 2.0}, {1.0}};
  EXPECT_THROW(convergence_curve(ragged), std::invalid_argument);
  EXPECT_THROW(convergence_curve(std::vector<std::vector<double>>{}), std::invalid_argument);
}

TEST(QuantileReport, PerMethod) {
  std::vector<TrialMatrix> methods(2);
  methods[0].method = "a";
  methods[0].final_errors = {1, 2, 3, 4};
  methods[1].method = "b";
  methods[1].final_errors = {10, 10, 10, 50};
  const std::vector<double> deltas{0.5, 0.1};
  const auto r = quantile_report(methods, deltas);
  EXPECT_EQ(r.q.at("a"), (std::vector<double>{2, 4}));
  EXPECT_EQ(r.q.at("b"), (std::vector<double>{10, 50}));
  EXPECT_DOUBLE_EQ(r.mean_error.at("a"), 2.5);
  EXPECT_DOUBLE_EQ(r.mean_error.at("b"), 20.0);
}
