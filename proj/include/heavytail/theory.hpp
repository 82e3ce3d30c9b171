#pragma once

#include "heavytail/models.hpp"
#include "heavytail/optimizer.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/types.hpp"

#include <cstddef>

namespace heavytail {

struct TheoryInputs {
  RegularityConstants constants;
  std::size_t n = 1;
  /// Confidence parameter, must lie in (0, 2/e).
  double delta = 0.05;
  /// ||theta^1 - theta*||.
  double init_error = 0.0;
  /// Scaling constant C1 >= 1.
  double c1 = 1.0;

  void validate() const;
};

struct TheoryOutputs {
  double gamma = 1.0;
  StepSchedule schedule{1.0, 1.0};
  double lambda = 0.0;
  /// High-probability bound on ||theta^{N+1} - theta*||.
  double error_bound = 0.0;
};

/// General delay, clipping level and l2 bound for a strongly convex, smooth risk
/// with position-dependent gradient noise (alpha, beta).
///
///   gamma  = 144 max{tau_u/tau_l, 96 alpha/tau_l^2} log(2/delta) + 1
///   lambda = C1 sqrt(tau_l^2 gamma (gamma-1) r^2 / log(2/delta)^2 + (N+gamma) beta / log(2/delta))
///   bound  = 100 C1 (gamma r / (N+gamma) + sqrt(beta log(2/delta) / (N+gamma)) / tau_l)
///
/// with r = ||theta^1 - theta*||. Throws std::invalid_argument for delta outside
/// (0, 2/e), C1 < 1, N = 0, or a non-finite alpha.
TheoryOutputs general_hyperparams(const TheoryInputs& in);

/// Mean-estimation specialization: gamma = 144 log(2/delta) + 1, eta_t = 1/(t+gamma),
/// lambda with beta = tr(Sigma), and the bound
///   100 (gamma r / (N+gamma) + sqrt(tr(Sigma) log(2/delta) / (N+gamma))).
TheoryOutputs mean_hyperparams(double trace_covariance, std::size_t n, double delta,
                                     double init_error, double c1 = 1.0);

/// Linear-regression specialization using the covariate fourth-moment constant:
///   gamma  = 144 max{tau_u/tau_l, 192 (C4+1) p tau_u^2 / tau_l^2} log(2/delta) + 1
///   lambda = C1 sqrt(tau_l^2 gamma(gamma-1) r^2 / log(2/delta)^2 + (N+gamma) sigma^2 p tau_u / log(2/delta))
///   bound  = 100 C1 (gamma r / (N+gamma) + (sigma/tau_l) sqrt(p tau_u log(2/delta) / (N+gamma)))
/// Throws std::invalid_argument when in.constants.c4 is empty.
TheoryOutputs regression_hyperparams(const TheoryInputs& in, std::size_t dim, double noise_variance);

/// Samples needed for an excess risk of eps, up to constants (leading constant 1):
///   max(sqrt(tau_u^3 r0 / (tau_l^3 eps)), tau_u sigma^2 / (tau_l^2 eps)) log(1/delta)
double sample_complexity(double tau_l, double tau_u, double sigma2, double r0,
                                    double eps, double delta);

/// exp(-a^2 / (2 (v + b a))).
double freedman_bound(double a, double v, double b);

struct ClipNoiseEstimate {
  /// ||E[eps]||
  double bias_norm = 0.0;
  /// E||eps - E[eps]||^2
  double var_mean = 0.0;
  /// max ||eps - E[eps]|| over the draws
  double v_norm_max = 0.0;
};

/// Monte-Carlo decomposition of eps = grad R(theta) - clip(grad(theta, x), lambda)
/// into its mean (bias) and centred part, with E[eps] estimated from the same
/// n_mc draws. Requires n_mc >= 10^4.
ClipNoiseEstimate estimate_clip_noise(const LossModel& model, const Vector& theta, double lambda,
                                      std::size_t n_mc, SampleStream& stream);

/// Fraction of `runs` simple random walks with steps +-b (T steps) for which some
/// partial sum reaches `a` while the accumulated conditional variance s b^2 <= v.
double simulate_freedman_event(std::size_t steps, std::size_t runs, double a, double v, double b,
                               CounterRng& rng);

}  // namespace heavytail
