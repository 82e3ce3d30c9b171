#include "heavytail/optimizer.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace heavytail {

Vector clip(const Vector& g, double level) {
  if (!(level >= 0.0)) throw std::invalid_argument("clip level must be >= 0");
  const double norm = g.norm();
  if (norm <= level || norm == 0.0) return g;
  return g * (level / norm);
}

StepSchedule::StepSchedule(double tau_l, double gamma) : tau_l_(tau_l), gamma_(gamma) {
  if (!(tau_l > 0.0) || !std::isfinite(tau_l))
    throw std::invalid_argument("step schedule requires a finite tau_l > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("step schedule requires a finite gamma >= 0");
}

Vector regularizer_grad(const Regularizer& reg, const Vector& theta) {
  switch (reg.kind) {
    case Regularizer::Kind::ridge:
      return reg.weight * theta;
    case Regularizer::Kind::lasso:
      return reg.weight * theta.unaryExpr([](double v) { return double((v > 0.0) - (v < 0.0)); });
    case Regularizer::Kind::none:
    case Regularizer::Kind::huber:
      break;
  }
  return Vector::Zero(theta.size());
}

Vector regularized_grad(const LossModel& model, const Regularizer& reg, const Vector& theta,
                        const Sample& s) {
  if (reg.kind == Regularizer::Kind::huber) return model.huber_grad(theta, s, reg.threshold);
  Vector g = model.grad(theta, s);
  if (reg.kind != Regularizer::Kind::none) g += regularizer_grad(reg, theta);
  return g;
}

void OptimizerConfig::validate() const {
  if (clip_level && !(*clip_level >= 0.0))
    throw std::invalid_argument("clip level must be >= 0");
  if (regularizer.weight < 0.0) throw std::invalid_argument("regularization weight must be >= 0");
  if (regularizer.kind == Regularizer::Kind::huber && !(regularizer.threshold > 0.0))
    throw std::invalid_argument("huber threshold must be > 0");
}

TaskStream::TaskStream(TaskSpec task, CounterRng rng) : task_(std::move(task)), rng_(rng) {
  heavytail::validate(task_);
}

bool TaskStream::next(Sample& out) {
  out = draw_sample(task_, rng_);
  return true;
}

bool BufferStream::next(Sample& out) {
  if (pos_ >= samples_.size()) return false;
  out = samples_[pos_++];
  return true;
}

StreamingOptimizer::StreamingOptimizer(LossModelPtr model, OptimizerConfig config)
    : model_(std::move(model)), config_(std::move(config)) {
  if (!model_) throw std::invalid_argument("optimizer requires a model");
  config_.validate();
  if (config_.regularizer.kind == Regularizer::Kind::huber && !model_->supports_huber())
    throw std::invalid_argument("the huber regularizer requires a regression model");
  theta_ = config_.initial ? *config_.initial : model_->initial_param();
  if (static_cast<std::size_t>(theta_.size()) != model_->dim())
    throw std::invalid_argument("initial point has the wrong dimension");
}

void StreamingOptimizer::step(const Sample& s) {
  ++t_;
  Vector g = regularized_grad(*model_, config_.regularizer, theta_, s);
  if (config_.clip_level) {
    g = clip(g, *config_.clip_level);
    assert(g.norm() <= *config_.clip_level * (1.0 + 1e-12));
  }
  theta_ -= config_.schedule.step(t_) * g;
  if (model_->domain().is_ball()) theta_ = project(model_->domain(), theta_);
}

RunResult run(LossModelPtr model, const OptimizerConfig& config, SampleStream& stream,
              std::size_t n) {
  if (n == 0) throw std::invalid_argument("run requires n >= 1");
  StreamingOptimizer opt(std::move(model), config);
  RunResult result;
  if (config.record_trajectory) {
    result.l2_error_trajectory.emplace();
    result.l2_error_trajectory->reserve(n + 1);
    result.l2_error_trajectory->push_back(opt.error());
  }
  Sample s;
  for (std::size_t t = 0; t < n; ++t) {
    if (!stream.next(s)) throw StreamExhausted(t, n);
    opt.step(s);
    if (result.l2_error_trajectory) result.l2_error_trajectory->push_back(opt.error());
  }
  result.final_param = opt.param();
  result.samples_consumed = n;
  return result;
}

}  // namespace heavytail
