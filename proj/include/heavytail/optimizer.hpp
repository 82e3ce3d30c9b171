#pragma once

#include "heavytail/distributions.hpp"
#include "heavytail/models.hpp"
#include "heavytail/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace heavytail {

/// Rescales g to norm `level` when ||g|| exceeds it. clip(0, level) = 0.
Vector clip(const Vector& g, double level);

/// eta_t = 1 / (tau_l (t + gamma)), t = 1, 2, ...
class StepSchedule {
 public:
  /// Throws std::invalid_argument unless tau_l > 0 and gamma >= 0.
  StepSchedule(double tau_l, double gamma);

  double tau_l() const noexcept { return tau_l_; }
  double gamma() const noexcept { return gamma_; }
  double step(std::size_t t) const noexcept {
    return 1.0 / (tau_l_ * (static_cast<double>(t) + gamma_));
  }

 private:
  double tau_l_;
  double gamma_;
};

struct Regularizer {
  enum class Kind { none, ridge, lasso, huber };

  Kind kind = Kind::none;
  /// mu_r for ridge and lasso.
  double weight = 0.0;
  /// kappa for huber.
  double threshold = 0.0;

  static Regularizer none() { return {}; }
  static Regularizer ridge(double weight) { return {Kind::ridge, weight, 0.0}; }
  static Regularizer lasso(double weight) { return {Kind::lasso, weight, 0.0}; }
  static Regularizer huber(double threshold) { return {Kind::huber, 0.0, threshold}; }
};

/// Ridge: mu_r theta. Lasso: mu_r sign(theta), sign(0) = 0. None and huber: zero
/// (huber acts on the residual, see regularized_grad).
Vector regularizer_grad(const Regularizer& reg, const Vector& theta);

/// Sample gradient with the regularizer applied: penalty subgradient added for
/// ridge/lasso, Huber score in place of the residual for huber.
Vector regularized_grad(const LossModel& model, const Regularizer& reg, const Vector& theta,
                        const Sample& s);

struct OptimizerConfig {
  StepSchedule schedule{1.0, 0.0};
  /// Empty means vanilla SGD. A level of 0 freezes the iterate.
  std::optional<double> clip_level;
  Regularizer regularizer;
  bool record_trajectory = false;
  /// Overrides the model's default starting point.
  std::optional<Vector> initial;

  void validate() const;
};

/// Source of samples for the streaming loop.
class SampleStream {
 public:
  virtual ~SampleStream() = default;
  /// Writes the next sample into `out`; false when the stream has ended.
  virtual bool next(Sample& out) = 0;
};

/// Unbounded stream drawn from a task's generator.
class TaskStream final : public SampleStream {
 public:
  TaskStream(TaskSpec task, CounterRng rng);
  bool next(Sample& out) override;

 private:
  TaskSpec task_;
  CounterRng rng_;
};

/// Finite stream over pre-drawn samples (not owned).
class BufferStream final : public SampleStream {
 public:
  explicit BufferStream(std::span<const Sample> samples) : samples_(samples) {}
  bool next(Sample& out) override;
  std::size_t position() const noexcept { return pos_; }

 private:
  std::span<const Sample> samples_;
  std::size_t pos_ = 0;
};

/// One clipped/vanilla/regularized SGD iterate advanced one sample at a time.
class StreamingOptimizer {
 public:
  StreamingOptimizer(LossModelPtr model, OptimizerConfig config);

  void step(const Sample& s);

  const Vector& param() const noexcept { return theta_; }
  std::size_t steps() const noexcept { return t_; }
  double error() const { return (theta_ - model_->true_param()).norm(); }
  const OptimizerConfig& config() const noexcept { return config_; }
  const LossModel& model() const noexcept { return *model_; }

 private:
  LossModelPtr model_;
  OptimizerConfig config_;
  Vector theta_;
  std::size_t t_ = 0;
};

struct RunResult {
  Vector final_param;
  /// ||theta^t - theta*|| for t = 1..n+1 when recorded.
  std::optional<std::vector<double>> l2_error_trajectory;
  std::size_t samples_consumed = 0;
};

/// Runs exactly n updates with batch size 1. Throws std::invalid_argument for
/// n = 0 and StreamExhausted if the stream ends early.
RunResult run(LossModelPtr model, const OptimizerConfig& config, SampleStream& stream,
              std::size_t n);

}  // namespace heavytail
