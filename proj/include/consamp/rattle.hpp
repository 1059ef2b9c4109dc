#pragma once

// Constrained HMC on an equality manifold c(theta) = 0 using the RATTLE
// integrator. Metric is the identity: H = U(theta) + phi^T phi / 2.

#include "consamp/hmc.hpp"
#include "consamp/model.hpp"

#include <vector>

namespace consamp {

/// Position and cotangent tolerance on a RattleState.
inline constexpr double kManifoldTol = 1e-8;
/// Newton stopping tolerance on ||c||_inf.
inline constexpr double kNewtonTol = 1e-10;
inline constexpr int kNewtonMaxIterations = 50;

struct RattleState {
  Vector position;
  Vector momentum;
  /// Multipliers from the last step (position and momentum constraints).
  Vector lambda;
  Vector mu;
};

struct RattleDiagnostics {
  int newton_iterations = 0;
  /// ||c(theta)||_inf after each Newton update.
  std::vector<double> residuals;
};

/// Projection of v onto the null space of jac (the cotangent space).
Vector cotangent_project(const Matrix& jac, const Vector& v);

/// One RATTLE step of size eps. Throws StepFailure when the position
/// multiplier does not converge within 50 Newton iterations.
RattleState rattle_step(const TargetModel& model, const EqualityManifold& manifold, const RattleState& s,
                        double step_size, RattleDiagnostics* diag = nullptr);

/// One constrained HMC transition. Failed RATTLE steps reject the proposal.
StepResult chmc_step(const TargetModel& model, const EqualityManifold& manifold, const Vector& current,
                     const LeapfrogConfig& cfg, Rng& rng);

}  // namespace consamp
