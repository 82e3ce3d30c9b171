#include "heavytail/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heavytail {

namespace {

void require_delta(double delta) {
  if (!(delta > 0.0) || !(delta < 2.0 / std::numbers::e))
    throw std::invalid_argument("delta must lie in (0, 2/e)");
}

// Shared tail of the gamma -> (lambda, bound) computation.
TheoryOutputs finish(double gamma, double tau_l, double beta, const TheoryInputs& in,
                     double bound_c1) {
  const double log_term = std::log(2.0 / in.delta);
  const double r = in.init_error;
  const double n_gamma = static_cast<double>(in.n) + gamma;
  TheoryOutputs out;
  out.gamma = gamma;
  out.schedule = StepSchedule(tau_l, gamma);
  out.lambda = in.c1 * std::sqrt(tau_l * tau_l * gamma * (gamma - 1.0) * r * r /
                                     (log_term * log_term) +
                                 n_gamma * beta / log_term);
  out.error_bound =
      100.0 * bound_c1 * (gamma * r / n_gamma + std::sqrt(beta * log_term / n_gamma) / tau_l);
  return out;
}

}  // namespace

void TheoryInputs::validate() const {
  constants.validate();
  require_delta(delta);
  if (n == 0) throw std::invalid_argument("N must be >= 1");
  if (!(c1 >= 1.0)) throw std::invalid_argument("C1 must be >= 1");
  if (!(init_error >= 0.0)) throw std::invalid_argument("initial error must be >= 0");
}

TheoryOutputs general_hyperparams(const TheoryInputs& in) {
  in.validate();
  const auto& c = in.constants;
  if (!std::isfinite(c.alpha) || !std::isfinite(c.beta))
    throw std::invalid_argument("alpha and beta must be finite");
  const double log_term = std::log(2.0 / in.delta);
  const double gamma =
      144.0 * std::max(c.tau_u / c.tau_l, 96.0 * c.alpha / (c.tau_l * c.tau_l)) * log_term + 1.0;
  return finish(gamma, c.tau_l, c.beta, in, in.c1);
}

TheoryOutputs mean_hyperparams(double trace_covariance, std::size_t n, double delta,
                                     double init_error, double c1) {
  TheoryInputs in;
  in.constants.tau_l = in.constants.tau_u = 1.0;
  in.constants.alpha = 0.0;
  in.constants.beta = trace_covariance;
  in.n = n;
  in.delta = delta;
  in.init_error = init_error;
  in.c1 = c1;
  in.validate();
  const double gamma = 144.0 * std::log(2.0 / delta) + 1.0;
  // The mean-estimation bound carries no C1 factor.
  return finish(gamma, 1.0, trace_covariance, in, 1.0);
}

TheoryOutputs regression_hyperparams(const TheoryInputs& in, std::size_t dim,
                                     double noise_variance) {
  in.validate();
  const auto& c = in.constants;
  if (!c.c4) throw std::invalid_argument("regression hyperparameters require the fourth-moment constant C4");
  if (!(noise_variance >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
  const double p = static_cast<double>(dim);
  const double log_term = std::log(2.0 / in.delta);
  const double gamma =
      144.0 *
          std::max(c.tau_u / c.tau_l, 192.0 * (*c.c4 + 1.0) * p * c.tau_u * c.tau_u /
                                          (c.tau_l * c.tau_l)) *
          log_term +
      1.0;
  return finish(gamma, c.tau_l, noise_variance * p * c.tau_u, in, in.c1);
}

double sample_complexity(double tau_l, double tau_u, double sigma2, double r0,
                                    double eps, double delta) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (!(r0 >= 0.0)) throw std::invalid_argument("r0 must be >= 0");
  if (!(tau_l > 0.0) || !(tau_u >= tau_l)) throw std::invalid_argument("need 0 < tau_l <= tau_u");
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const double init_term = std::sqrt(tau_u * tau_u * tau_u * r0 / (tau_l * tau_l * tau_l * eps));
  const double noise_term = tau_u * sigma2 / (tau_l * tau_l * eps);
  return std::max(init_term, noise_term) * std::log(1.0 / delta);
}

double freedman_bound(double a, double v, double b) {
  if (!(a > 0.0) || !(v > 0.0) || !(b >= 0.0))
    throw std::invalid_argument("freedman_bound requires a, v > 0 and b >= 0");
  return std::exp(-a * a / (2.0 * (v + b * a)));
}

ClipNoiseEstimate estimate_clip_noise(const LossModel& model, const Vector& theta, double lambda,
                                      std::size_t n_mc, SampleStream& stream) {
  if (n_mc < 10000) throw std::invalid_argument("estimate_clip_noise requires n_mc >= 10^4");
  if (!(lambda > 0.0)) throw std::invalid_argument("clip level must be > 0");
  const Vector true_grad = model.risk_grad(theta);
  Eigen::MatrixXd eps(theta.size(), static_cast<Index>(n_mc));
  Sample s;
  for (Index j = 0; j < eps.cols(); ++j) {
    if (!stream.next(s)) throw StreamExhausted(static_cast<std::size_t>(j), n_mc);
    eps.col(j) = true_grad - clip(model.grad(theta, s), lambda);
  }
  const Vector bias = eps.rowwise().mean();
  ClipNoiseEstimate est;
  est.bias_norm = bias.norm();
  double sum_sq = 0.0;
  for (Index j = 0; j < eps.cols(); ++j) {
    const double d = (eps.col(j) - bias).norm();
    sum_sq += d * d;
    est.v_norm_max = std::max(est.v_norm_max, d);
  }
  est.var_mean = sum_sq / static_cast<double>(n_mc);
  return est;
}

double simulate_freedman_event(std::size_t steps, std::size_t runs, double a, double v, double b,
                               CounterRng& rng) {
  if (steps == 0 || runs == 0) throw std::invalid_argument("steps and runs must be >= 1");
  // V_s = s b^2 is deterministic, so the event window is s <= floor(v / b^2).
  const std::size_t window =
      b > 0.0 ? std::min<std::size_t>(steps, static_cast<std::size_t>(std::floor(v / (b * b))))
              : steps;
  // Work in units of b: the walk reaches a once it hits ceil(a / b) up-steps net.
  const double target = a / b;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < runs; ++r) {
    long long sum = 0;
    std::uint64_t bits = 0;
    unsigned left = 0;
    for (std::size_t s = 0; s < window; ++s) {
      if (left == 0) {
        bits = rng();
        left = 64;
      }
      sum += (bits & 1u) ? 1 : -1;
      bits >>= 1;
      --left;
      if (static_cast<double>(sum) >= target) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(runs);
}

}  // namespace heavytail
