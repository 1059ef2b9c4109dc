#pragma once

#include "consamp/model.hpp"
#include "consamp/rng.hpp"

#include <Eigen/Cholesky>

#include <optional>

namespace consamp {

/// Energy error beyond which a trajectory is treated as divergent.
inline constexpr double kDivergenceThreshold = 1000.0;

/// Momentum covariance M. Identity unless a matrix is supplied.
class MassMatrix {
 public:
  MassMatrix() = default;
  explicit MassMatrix(const Matrix& m);

  bool is_identity() const { return !llt_.has_value(); }
  /// M^{-1} phi.
  Vector velocity(const Vector& phi) const;
  /// phi^T M^{-1} phi / 2.
  double kinetic(const Vector& phi) const { return 0.5 * phi.dot(velocity(phi)); }
  /// Draw from N(0, M).
  Vector sample(Rng& rng, Index dim) const;

 private:
  std::optional<Eigen::LLT<Matrix>> llt_;
};

struct PhaseState {
  Vector position;
  Vector momentum;
};

struct LeapfrogConfig {
  double step_size = 0.1;
  int steps = 10;
  /// Per-iteration step size is multiplied by Uniform(1 - jitter, 1 + jitter).
  double jitter = 0.1;

  void validate() const;
  double draw_step(Rng& rng) const {
    return jitter > 0.0 ? step_size * rng.uniform(1.0 - jitter, 1.0 + jitter) : step_size;
  }
};

/// L leapfrog steps of size eps. Throws DivergenceError if a non-finite
/// gradient or position is encountered.
PhaseState leapfrog(const TargetModel& model, PhaseState s, double step_size, int steps,
                    const MassMatrix& mass = {});

inline PhaseState leapfrog(const TargetModel& model, PhaseState s, const LeapfrogConfig& cfg,
                           const MassMatrix& mass = {}) {
  return leapfrog(model, std::move(s), cfg.step_size, cfg.steps, mass);
}

double hamiltonian(const TargetModel& model, const PhaseState& s, const MassMatrix& mass = {});

/// Result of one Markov transition.
struct StepResult {
  Vector position;
  bool accepted = false;
  double accept_prob = 0.0;
  long bounces = 0;
};

/// Metropolis acceptance of an energy change; returns (accepted, min(1, e^-dH)).
std::pair<bool, double> metropolis(double delta_h, Rng& rng);

/// One HMC transition. When `cs` is given, proposals that violate it are
/// rejected outright.
StepResult hmc_step(const TargetModel& model, const ConstraintSet* cs, const Vector& current,
                    const LeapfrogConfig& cfg, Rng& rng, const MassMatrix& mass = {});

/// Random-walk Metropolis with Gaussian proposal and constraint rejection.
StepResult rwm_step(const TargetModel& model, const ConstraintSet* cs, const Vector& current,
                    double proposal_scale, Rng& rng);

}  // namespace consamp
