#include "heavytail/batch_baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace heavytail {

namespace {

constexpr double kCoincide = 1e-12;

void require_points(std::span<const Vector> points) {
  if (points.empty()) throw std::invalid_argument("need at least one point");
  const Index p = points.front().size();
  for (const auto& v : points) {
    if (v.size() != p) throw std::invalid_argument("points have inconsistent dimensions");
  }
}

double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

struct WeiszfeldTerms {
  Vector weighted_sum;  // sum of x_i / d_i over non-coincident points
  Vector pull;          // R(y) = sum of (x_i - y) / d_i
  double weight = 0.0;  // sum of 1 / d_i
  double multiplicity = 0.0;
};

WeiszfeldTerms weiszfeld_terms(std::span<const Vector> points, const Vector& y) {
  WeiszfeldTerms t{Vector::Zero(y.size()), Vector::Zero(y.size())};
  for (const auto& x : points) {
    const double d = (x - y).norm();
    if (d <= kCoincide) {
      t.multiplicity += 1.0;
      continue;
    }
    t.weighted_sum += x / d;
    t.pull += (x - y) / d;
    t.weight += 1.0 / d;
  }
  return t;
}

}  // namespace

std::size_t default_bucket_count(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  return static_cast<std::size_t>(std::ceil(8.0 * std::log(1.0 / delta)));
}

Vector coordinate_median(std::span<const Vector> points) {
  require_points(points);
  const Index p = points.front().size();
  Vector out(p);
  std::vector<double> column(points.size());
  for (Index j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < points.size(); ++i) column[i] = points[i][j];
    out[j] = median_of(column);
  }
  return out;
}

double geometric_median_objective(std::span<const Vector> points, const Vector& m) {
  double total = 0.0;
  for (const auto& x : points) total += (x - m).norm();
  return total;
}

GeometricMedianResult geometric_median(std::span<const Vector> points, double tol,
                                       std::size_t max_iter) {
  require_points(points);
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");

  for (const auto& x : points) {
    const auto t = weiszfeld_terms(points, x);
    if (t.pull.norm() <= t.multiplicity) return {x, 0, true};
  }

  Vector y = Vector::Zero(points.front().size());
  for (const auto& x : points) y += x;
  y /= static_cast<double>(points.size());

  GeometricMedianResult result{y, 0, false};
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const auto t = weiszfeld_terms(points, y);
    Vector next = t.weighted_sum / t.weight;
    if (t.multiplicity > 0.0) {
      const double r = t.pull.norm();
      if (r <= t.multiplicity) return {y, it, true};
      const double mix = t.multiplicity / r;
      next = (1.0 - mix) * next + mix * y;
    }
    const double step = (next - y).norm();
    y = std::move(next);
    result.iterations = it;
    if (step < tol) {
      result.converged = true;
      break;
    }
  }
  result.point = y;
  return result;
}

Vector median_of_means(std::span<const Vector> samples, const MoMConfig& config) {
  if (samples.empty()) throw std::invalid_argument("median_of_means requires samples");
  require_points(samples);
  const std::size_t n = samples.size();
  const std::size_t k = config.n_buckets;
  if (k == 0 || k > n) throw std::invalid_argument("bucket count must satisfy 1 <= k <= n");

  std::vector<Vector> means;
  means.reserve(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    Vector sum = Vector::Zero(samples.front().size());
    for (std::size_t i = 0; i < size; ++i) sum += samples[pos + i];
    means.push_back(sum / static_cast<double>(size));
    pos += size;
  }

  if (k == 1) return means.front();
  if (config.variant == MomVariant::coordinate_wise) return coordinate_median(means);
  return geometric_median(means, config.weiszfeld_tol, config.weiszfeld_max_iter).point;
}

}  // namespace heavytail
