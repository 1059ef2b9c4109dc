#pragma once

// Bayesian bridge regression: y ~ N(X beta, s2 I), beta ~ N(0, prior I)
// restricted to ||beta||_q <= r, sampled with Spherical HMC through the
// q-norm-to-ball transform.

#include "consamp/hmc.hpp"
#include "consamp/model.hpp"
#include "consamp/rng.hpp"

#include <vector>

namespace consamp {

struct RegressionData {
  Matrix X;
  Vector y;
};

/// Columns of X centered and scaled to unit (sample) variance; y centered.
RegressionData standardize(const RegressionData& data);

/// Least squares fit via a Cholesky solve of the normal equations.
/// Throws PreconditionError if X^T X is singular.
Vector ols_fit(const Matrix& X, const Vector& y);

struct BridgeModel {
  Matrix X;
  Vector y;
  double q = 1.0;
  double r = 1.0;
  double noise_variance = 1.0;
  double prior_variance = 100.0;

  void validate() const;
};

/// Unnormalized log posterior of beta (without the norm indicator; the
/// transform chain enforces it).
TargetModel bridge_posterior(const BridgeModel& m);

inline constexpr double kMaxBallScale = 0.1;

/// Delta-method posterior standard deviation of the tightest coordinate in
/// ball coordinates at the OLS fit (pulled onto the q-ball), capped at
/// kMaxBallScale.
double ball_scale(const RegressionData& standardized, double q, double r);

struct BridgeSettings {
  long samples = 2000;
  long burnin = 500;
  /// Leapfrog step in units of ball_scale.
  double step_size = 0.3;
  int steps = 20;
  double jitter = 0.1;
  /// After each HMC step, propose flipping the sign of every coordinate in
  /// turn (Metropolis). Sign changes are otherwise rare for q < 2, where the
  /// ball-coordinate density vanishes on theta_i = 0.
  bool sign_flips = true;
  /// Draw the noise variance from its inverse-gamma conditional between
  /// sweeps. When false it stays at `noise_variance`.
  bool sample_noise = true;
  double noise_variance = 1.0;
  double prior_variance = 100.0;
  /// Inverse-gamma(shape, scale) prior on the noise variance.
  double noise_shape = 1.0;
  double noise_scale = 1.0;
};

struct BridgePathPoint {
  double r = 0.0;
  Vector posterior_mean;
  Vector posterior_sd;
  /// Monte Carlo standard error of each posterior mean (sd / sqrt(ESS)).
  Vector mc_standard_error;
  /// ||posterior mean||_1 / ||beta_ols||_1.
  double shrinkage = 0.0;
  double acceptance = 0.0;
  double max_qnorm = 0.0;
  Matrix draws;
};

struct BridgePath {
  double q = 1.0;
  Vector ols;
  std::vector<BridgePathPoint> points;
};

/// Posterior draws for one radius on already-standardized data.
BridgePathPoint bridge_posterior_sample(const RegressionData& standardized, double q, double r,
                                        const BridgeSettings& settings, Rng& rng);

/// Standardizes the data, then samples the posterior for each radius.
BridgePath bridge_fit(const RegressionData& data, double q, const std::vector<double>& r_grid,
                      const BridgeSettings& settings, Rng& rng);

/// Number of coefficients with |beta_i| < rel * max|reference_i|.
int count_near_zero(const Vector& beta, const Vector& reference, double rel = 0.01);

/// Synthetic regression data: n rows, D columns of correlated Gaussian
/// predictors, y = X beta_true + noise_sd * eps.
RegressionData synthetic_regression(Index n, const Vector& beta_true, double noise_sd, Rng& rng);

}  // namespace consamp
