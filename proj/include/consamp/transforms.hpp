#pragma once

// Change-of-variable maps from constrained domains onto the closed unit
// ball. Every DomainTransform maps a source point beta to an image point
// theta; log_jacobian is log|det d beta / d theta| evaluated at theta.

#include "consamp/error.hpp"
#include "consamp/model.hpp"

#include <Eigen/Core>

#include <cmath>
#include <vector>

namespace consamp {

/// Floor applied to |theta_i| inside logarithms and negative powers.
inline constexpr double kCoordinateClamp = 1e-12;

namespace detail {
template <typename Scalar>
Scalar sign(Scalar x) {
  return x > Scalar(0) ? Scalar(1) : (x < Scalar(0) ? Scalar(-1) : Scalar(0));
}
}  // namespace detail

/// theta_i = sgn(beta_i) |beta_i|^(q/2). Maps the unit q-norm ball onto the
/// unit 2-norm ball.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> qnorm_to_ball(
    const Eigen::MatrixBase<Derived>& beta, typename Derived::Scalar q) {
  using Scalar = typename Derived::Scalar;
  if (!(q > Scalar(0))) throw PreconditionError("q-norm transform requires q > 0");
  return beta.unaryExpr([q](Scalar b) { return detail::sign(b) * std::pow(std::abs(b), q / Scalar(2)); });
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> ball_to_qnorm(
    const Eigen::MatrixBase<Derived>& theta, typename Derived::Scalar q) {
  using Scalar = typename Derived::Scalar;
  if (!(q > Scalar(0))) throw PreconditionError("q-norm transform requires q > 0");
  return theta.unaryExpr([q](Scalar t) { return detail::sign(t) * std::pow(std::abs(t), Scalar(2) / q); });
}

/// theta = beta ||beta||_inf / ||beta||_2, with 0 -> 0. Maps the cube
/// [-1,1]^d onto the unit ball, preserving directions.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> infnorm_to_ball(
    const Eigen::MatrixBase<Derived>& beta) {
  using Scalar = typename Derived::Scalar;
  const Scalar n2 = beta.norm();
  if (n2 == Scalar(0)) return beta;
  return beta * (beta.cwiseAbs().maxCoeff() / n2);
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> ball_to_infnorm(
    const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  const Scalar ninf = theta.cwiseAbs().maxCoeff();
  if (ninf == Scalar(0)) return theta;
  return theta * (theta.norm() / ninf);
}

/// Affine map of the box [l, u] onto [-1, 1]^d.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> box_affine(
    const Eigen::MatrixBase<Derived>& lower, const Eigen::MatrixBase<Derived>& upper,
    const Eigen::MatrixBase<Derived>& beta) {
  return ((beta - lower).array() * 2 / (upper - lower).array() - 1).matrix();
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> box_affine_inverse(
    const Eigen::MatrixBase<Derived>& lower, const Eigen::MatrixBase<Derived>& upper,
    const Eigen::MatrixBase<Derived>& theta) {
  return (lower.array() + (theta.array() + 1) * (upper - lower).array() / 2).matrix();
}

class DomainTransform {
 public:
  enum class Kind { QNormToBall, InfNormToBall, BoxAffine };

  /// {||beta||_q <= radius} -> unit ball; beta is pre-scaled by 1/radius.
  static DomainTransform qnorm_to_ball(double q, double radius = 1.0);
  /// {||beta||_inf <= radius} -> unit ball.
  static DomainTransform infnorm_to_ball(double radius = 1.0);
  /// [lower, upper] -> [-1, 1]^d.
  static DomainTransform box_affine(Vector lower, Vector upper);

  Kind kind() const { return kind_; }
  double q() const { return q_; }
  double radius() const { return radius_; }

  Vector forward(const Vector& beta) const;
  Vector inverse(const Vector& theta) const;
  /// log|det d inverse(theta) / d theta|.
  double log_jacobian(const Vector& theta) const;
  Vector log_jacobian_gradient(const Vector& theta) const;
  /// J^T g where J = d inverse(theta) / d theta.
  Vector pullback(const Vector& theta, const Vector& grad_beta) const;

 private:
  DomainTransform(Kind k, double q, double radius, Vector lower, Vector upper);

  Kind kind_;
  double q_ = 2.0;
  double radius_ = 1.0;
  Vector lower_;
  Vector upper_;
};

/// Composition beta = z_0 -> z_1 -> ... -> z_K = theta of DomainTransforms.
class TransformChain {
 public:
  TransformChain() = default;
  explicit TransformChain(std::vector<DomainTransform> steps) : steps_(std::move(steps)) {}

  const std::vector<DomainTransform>& steps() const { return steps_; }

  Vector forward(const Vector& beta) const;
  Vector inverse(const Vector& theta) const;
  double log_jacobian(const Vector& theta) const;

  /// Value and theta-gradient of log p(beta(theta)) + log_jacobian(theta)
  /// for a source-space log density.
  struct Pulled {
    double log_density = 0.0;
    Vector gradient;
    Vector beta;
  };
  Pulled pull_back(const TargetModel& source, const Vector& theta) const;

 private:
  std::vector<DomainTransform> steps_;
};

/// Transform chain that maps the feasible set of `cs` onto the unit ball.
/// Box: affine to the cube, then the cube-to-ball map. QNormBall: sign-power
/// map for finite q, cube-to-ball for q = inf.
TransformChain ball_chain_for(const ConstraintSet& cs);

}  // namespace consamp
