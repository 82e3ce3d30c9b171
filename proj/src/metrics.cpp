#include "heavytail/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace heavytail {

namespace {

// (n - k) / n <= delta, evaluated exactly as the exceedance-fraction definition.
bool exceedance_ok(std::size_t n, std::size_t k, double delta) {
  return static_cast<double>(n - k) / static_cast<double>(n) <= delta;
}

}  // namespace

double quantile_loss_sorted(std::span<const double> sorted, double delta) {
  if (sorted.empty()) throw std::invalid_argument("quantile_loss requires at least one error");
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const std::size_t n = sorted.size();
  auto k = static_cast<std::size_t>(
      std::clamp(std::ceil((1.0 - delta) * static_cast<double>(n)), 1.0, static_cast<double>(n)));
  // Correct rounding at the boundary so k is the smallest index meeting the definition.
  while (k < n && !exceedance_ok(n, k, delta)) ++k;
  while (k > 1 && exceedance_ok(n, k - 1, delta)) --k;
  return sorted[k - 1];
}

double quantile_loss(std::span<const double> errors, double delta) {
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_loss_sorted(sorted, delta);
}

std::vector<CurvePoint> convergence_curve(std::span<const std::vector<double>> trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("convergence_curve requires trajectories");
  const std::size_t len = trajectories.front().size();
  for (const auto& tr : trajectories) {
    if (tr.size() != len) throw std::invalid_argument("trajectories have different lengths");
  }
  std::vector<CurvePoint> curve(len);
  std::vector<double> column(trajectories.size());
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t i = 0; i < trajectories.size(); ++i) column[i] = trajectories[i][t];
    std::sort(column.begin(), column.end());
    // Sum in trial order so the mean does not depend on how trials were scheduled.
    double sum = 0.0;
    for (const auto& tr : trajectories) sum += tr[t];
    curve[t] = {t + 1, sum / static_cast<double>(trajectories.size()),
                quantile_loss_sorted(column, 0.01)};
  }
  return curve;
}

double TrialMatrix::mean_error() const {
  if (final_errors.empty()) throw std::invalid_argument("no trials recorded");
  return std::accumulate(final_errors.begin(), final_errors.end(), 0.0) /
         static_cast<double>(final_errors.size());
}

QuantileReport quantile_report(std::span<const TrialMatrix> methods, std::span<const double> deltas) {
  QuantileReport report;
  report.deltas.assign(deltas.begin(), deltas.end());
  for (const auto& m : methods) {
    std::vector<double> sorted = m.final_errors;
    std::sort(sorted.begin(), sorted.end());
    auto& row = report.q[m.method];
    for (double d : deltas) row.push_back(quantile_loss_sorted(sorted, d));
    report.mean_error[m.method] = m.mean_error();
  }
  return report;
}

}  // namespace heavytail
