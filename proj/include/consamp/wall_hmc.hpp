#pragma once

// Reflection ("hard wall") HMC: the potential is infinite outside the
// feasible set, which turns every boundary crossing into a specular bounce
// of the momentum. Identity mass matrix throughout.

#include "consamp/hmc.hpp"
#include "consamp/model.hpp"

#include <vector>

namespace consamp {

/// More reflections than this in a single position update is an error.
inline constexpr int kMaxReflections = 1000;

/// phi' = phi - 2 <phi, n> n for a unit normal n.
template <typename DerivedPhi, typename DerivedN>
Eigen::Matrix<typename DerivedPhi::Scalar, Eigen::Dynamic, 1> reflect(
    const Eigen::MatrixBase<DerivedPhi>& phi, const Eigen::MatrixBase<DerivedN>& normal) {
  return phi - 2 * phi.dot(normal) * normal;
}

struct ReflectionEvent {
  /// Fraction of the full step completed when the wall was hit, in (0, 1].
  double step_fraction = 0.0;
  Index wall_index = 0;
  Vector point;
};

struct WallMove {
  Vector position;
  Vector momentum;
  std::vector<ReflectionEvent> events;
};

/// Full-step position update theta += eps * phi with specular reflection at
/// every wall crossing. Hits are exact for Box and LinearIneq, and located
/// by bisection (time tolerance 1e-10) for nonlinear walls.
WallMove wall_position_update(const ConstraintSet& cs, Vector position, Vector momentum,
                              double step_size);

/// Leapfrog with the position update replaced by wall_position_update.
PhaseState wall_leapfrog(const TargetModel& model, const ConstraintSet& cs, PhaseState s,
                         double step_size, int steps, long* bounces = nullptr);

/// One Wall HMC transition; StepResult::bounces counts reflections.
StepResult wall_hmc_step(const TargetModel& model, const ConstraintSet& cs, const Vector& current,
                         const LeapfrogConfig& cfg, Rng& rng);

}  // namespace consamp
