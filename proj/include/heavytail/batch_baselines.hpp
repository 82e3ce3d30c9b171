#pragma once

#include "heavytail/types.hpp"

#include <cstddef>
#include <span>

namespace heavytail {

enum class MomVariant { coordinate_wise, geometric };

struct MoMConfig {
  std::size_t n_buckets = 24;
  MomVariant variant = MomVariant::coordinate_wise;
  double weiszfeld_tol = 1e-8;
  std::size_t weiszfeld_max_iter = 1000;
};

/// ceil(8 log(1/delta)); 24 buckets at delta = 0.05.
std::size_t default_bucket_count(double delta = 0.05);

/// Per-coordinate median; even counts average the two middle order statistics.
Vector coordinate_median(std::span<const Vector> points);

struct GeometricMedianResult {
  Vector point;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Sum of Euclidean distances from m to the points.
double geometric_median_objective(std::span<const Vector> points, const Vector& m);

/// Modified Weiszfeld iteration (Vardi-Zhang step at data points) started from the
/// centroid. A data point satisfying the first-order optimality condition is
/// returned directly. Stops when the step norm falls below `tol`.
GeometricMedianResult geometric_median(std::span<const Vector> points, double tol = 1e-8,
                                       std::size_t max_iter = 1000);

/// Splits the samples into k contiguous buckets (the first n mod k buckets get one
/// extra sample), averages each bucket and takes the coordinate-wise or geometric
/// median of the bucket means.
Vector median_of_means(std::span<const Vector> samples, const MoMConfig& config);

}  // namespace heavytail
