#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace heavytail {

/// Empirical Q_delta: the smallest observed error whose exceedance fraction is
/// at most delta, i.e. the ceil((1 - delta) n)-th smallest error (1-based).
/// Requires 0 < delta < 1 and at least one error.
double quantile_loss(std::span<const double> errors, double delta);

/// Same as quantile_loss for data that is already sorted ascending.
double quantile_loss_sorted(std::span<const double> sorted_errors, double delta);

struct CurvePoint {
  std::size_t t = 0;
  double mean_error = 0.0;
  double q99_error = 0.0;
};

/// Pointwise mean and Q_0.01 (99th percentile) across equal-length trajectories.
/// Throws std::invalid_argument on empty or ragged input.
std::vector<CurvePoint> convergence_curve(std::span<const std::vector<double>> trajectories);

/// Final l2 errors (and optional trajectories) of one method across trials.
struct TrialMatrix {
  std::string method;
  std::vector<double> final_errors;
  std::vector<std::vector<double>> trajectories;

  double mean_error() const;
};

struct QuantileReport {
  std::vector<double> deltas;
  /// method -> Q_delta for each entry of `deltas`.
  std::map<std::string, std::vector<double>> q;
  std::map<std::string, double> mean_error;
};

QuantileReport quantile_report(std::span<const TrialMatrix> methods, std::span<const double> deltas);

}  // namespace heavytail
