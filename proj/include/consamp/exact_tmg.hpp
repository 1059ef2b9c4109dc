#pragma once

// Exact Hamiltonian sampler for Gaussians truncated by linear walls. In
// whitened coordinates the potential is ||x||^2 / 2, trajectories are
// harmonic, x(t) = x0 cos t + v0 sin t, and wall hits are solved in closed
// form; energy is conserved exactly, so every proposal is accepted.

#include "consamp/model.hpp"
#include "consamp/rng.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

namespace consamp {

/// Gaussian N(mean, covariance) restricted to walls.A theta + walls.b >= 0.
struct TmgSpec {
  Vector mean;
  Matrix covariance;
  LinearIneq walls;
};

/// Box bounds expressed as 2d wall rows (theta - l >= 0, u - theta >= 0).
LinearIneq box_walls(const Vector& lower, const Vector& upper);

/// Whitened form of a TmgSpec: theta = mean + chol * x with x standard
/// normal, and walls F x + g >= 0.
class WhitenedTmg {
 public:
  explicit WhitenedTmg(const TmgSpec& spec);

  Index dim() const { return mean_.size(); }
  Vector whiten(const Vector& theta) const;
  Vector unwhiten(const Vector& x) const;
  const Matrix& wall_matrix() const { return F_; }
  const Vector& wall_offset() const { return g_; }
  bool feasible(const Vector& x, double tol = kConstraintTol) const;

 private:
  Vector mean_;
  Matrix chol_;  // lower Cholesky factor of the covariance
  Matrix F_;
  Vector g_;
  Eigen::VectorXd wall_norms_;
};

WhitenedTmg whiten(const TmgSpec& spec);

/// Harmonic flow for time t: returns (x(t), v(t)).
template <typename DX, typename DV>
std::pair<Vector, Vector> exact_trajectory(const Eigen::MatrixBase<DX>& x0, const Eigen::MatrixBase<DV>& v0,
                                           double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  return {c * x0 + s * v0, -s * x0 + c * v0};
}

struct WallHit {
  double time = 0.0;
  Index wall = 0;
};

/// Earliest exit through a wall f_j(t) = F_j x(t) + g_j = 0 in
/// (min_time, horizon]. Grazing crossings (|f_j'(t)| < 1e-10) are ignored.
std::optional<WallHit> first_hit(const Vector& x0, const Vector& v0, const Matrix& F, const Vector& g,
                                 double horizon, double min_time = 0.0);

struct ExactTmgResult {
  Vector position;
  long bounces = 0;
};

inline constexpr double kDefaultTravelTime = std::numbers::pi / 2;

/// One exact HMC transition from `current` (original coordinates).
ExactTmgResult exact_tmg_step(const WhitenedTmg& tmg, const Vector& current, double travel_time, Rng& rng);

}  // namespace consamp
