#pragma once

// Spherical HMC. A target on the unit ball B^d is lifted to the sphere S^d
// by appending theta_{d+1} = sqrt(1 - ||theta||^2); hemispheres are
// identified, so crossing the equator is a bounce off the ball's boundary.
// Dynamics alternate velocity kicks with exact great-circle motion.

#include "consamp/hmc.hpp"
#include "consamp/model.hpp"
#include "consamp/transforms.hpp"

#include <Eigen/Core>

#include <cmath>
#include <memory>
#include <utility>

namespace consamp {

/// Floor on |theta_{d+1}| inside the metric term.
inline constexpr double kEquatorClamp = 1e-10;

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> augment(const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  const Scalar sq = theta.squaredNorm();
  if (std::sqrt(sq) > Scalar(1) + Scalar(1e-12)) throw PreconditionError("augment: point outside the unit ball");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(theta.size() + 1);
  out.head(theta.size()) = theta;
  out[theta.size()] = std::sqrt(std::max(Scalar(0), Scalar(1) - sq));
  return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> deaugment(const Eigen::MatrixBase<Derived>& x) {
  return x.head(x.size() - 1);
}

/// P(x) w = w - x (x . w).
template <typename DX, typename DW>
Eigen::Matrix<typename DX::Scalar, Eigen::Dynamic, 1> tangent_project(const Eigen::MatrixBase<DX>& x,
                                                                       const Eigen::MatrixBase<DW>& w) {
  return w - x * x.dot(w);
}

/// Great-circle flow for time eps: returns (x', v'). ||v'|| = ||v||.
template <typename DX, typename DV>
std::pair<Eigen::Matrix<typename DX::Scalar, Eigen::Dynamic, 1>, Eigen::Matrix<typename DX::Scalar, Eigen::Dynamic, 1>>
geodesic_update(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DV>& v, typename DX::Scalar eps) {
  using Scalar = typename DX::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Scalar speed = v.norm();
  if (speed == Scalar(0)) return {Vec(x), Vec(v)};
  const Scalar c = std::cos(speed * eps);
  const Scalar s = std::sin(speed * eps);
  return {Vec(x * c + v * (s / speed)), Vec(-x * (speed * s) + v * c)};
}

/// Potential energy of a target defined on S^d (points in R^{d+1}).
class SpherePotential {
 public:
  virtual ~SpherePotential() = default;

  /// Sphere dimension d; points have d + 1 coordinates.
  virtual Index sphere_dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  /// Gradient of an extension of the potential to R^{d+1}; only its tangent
  /// projection is used.
  virtual Vector gradient(const Vector& x) const = 0;
  /// True when x and its reflection through the equator are the same state.
  virtual bool identify_hemispheres() const { return false; }
};

/// Ball-lifted potential U_eff(x) = -log p(beta(theta)) - log|det d beta/d theta|
/// - log|theta_{d+1}|, with theta = first d coordinates of x.
class EffectivePotential : public SpherePotential {
 public:
  EffectivePotential(TargetModel base, TransformChain chain);

  Index sphere_dim() const override { return base_.dim; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool identify_hemispheres() const override { return true; }

  const TransformChain& chain() const { return chain_; }
  const TargetModel& base() const { return base_; }
  /// Source-space point for a sphere point.
  Vector to_source(const Vector& x) const { return chain_.inverse(deaugment(x)); }
  /// Sphere point (upper hemisphere) for a feasible source point.
  Vector from_source(const Vector& beta) const { return augment(chain_.forward(beta)); }

 private:
  TargetModel base_;
  TransformChain chain_;
};

struct SphericalState {
  Vector position;
  Vector velocity;
};

/// Velocity half-kick, geodesic move, hemisphere fold, velocity half-kick.
/// Throws DivergenceError on non-finite gradients.
SphericalState sph_leapfrog(const SpherePotential& pot, SphericalState s, double step_size, int steps);

/// One Spherical HMC transition. Output is folded to theta_{d+1} >= 0 when
/// the potential identifies hemispheres.
StepResult sph_hmc_step(const SpherePotential& pot, const Vector& current, const LeapfrogConfig& cfg, Rng& rng);

}  // namespace consamp
