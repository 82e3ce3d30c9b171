#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace heavytail {

/// Dense real vector used for parameters, gradients and covariates.
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// One observation. `y` is unused for the mean-estimation task.
struct Sample {
  Vector x;
  double y = 0.0;
};

/// Raised when a sample stream ends before the requested number of updates.
class StreamExhausted : public std::runtime_error {
 public:
  StreamExhausted(std::size_t consumed, std::size_t requested);

  std::size_t consumed() const noexcept { return consumed_; }
  std::size_t requested() const noexcept { return requested_; }

 private:
  std::size_t consumed_;
  std::size_t requested_;
};

}  // namespace heavytail
