#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <variant>

namespace consamp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Absolute tolerance used when deciding whether a point lies in a closed
/// constraint set.
inline constexpr double kConstraintTol = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Unnormalized target density p(theta). The potential energy is
/// U = -log p. Queries outside the support return -inf rather than throwing.
struct TargetModel {
  Index dim = 0;
  std::function<double(const Vector&)> log_density;
  std::function<Vector(const Vector&)> grad_log_density;

  double potential(const Vector& theta) const { return -log_density(theta); }
  Vector grad_potential(const Vector& theta) const { return -grad_log_density(theta); }
};

/// Multivariate normal N(mean, covariance), log density up to a constant.
TargetModel gaussian_model(Vector mean, const Matrix& covariance);

/// Constant density (zero potential) on R^dim.
TargetModel flat_model(Index dim);

// Constraint variants. Each describes c(theta) >= 0 (or = 0) componentwise.

/// l <= theta <= u. Components are ordered (theta - l, u - theta).
struct Box {
  Vector lower;
  Vector upper;
};

/// A theta + b >= 0.
struct LinearIneq {
  Matrix A;
  Vector b;
};

/// ||theta||_q <= r; q may be +inf. Single component r - ||theta||_q.
struct QNormBall {
  Index dim = 0;
  double q = 2.0;
  double r = 1.0;
};

/// Smooth inequality c(theta) >= 0 with Jacobian rows grad c_i.
struct SmoothIneq {
  Index dim = 0;
  std::function<Vector(const Vector&)> c;
  std::function<Matrix(const Vector&)> jacobian;
};

/// Smooth equality c(theta) = 0 with Jacobian dc/dtheta (m x d).
struct EqualityManifold {
  Index dim = 0;
  std::function<Vector(const Vector&)> c;
  std::function<Matrix(const Vector&)> jacobian;
};

class ConstraintSet {
 public:
  using Variant = std::variant<Box, LinearIneq, QNormBall, SmoothIneq, EqualityManifold>;

  /// Validates the variant's invariants (l < u, r > 0, q > 0, shapes).
  explicit ConstraintSet(Variant v);

  Index dim() const;
  /// Number of scalar constraint components.
  Index size() const;
  bool is_equality() const { return std::holds_alternative<EqualityManifold>(v_); }
  /// Box and LinearIneq: every component is affine in theta.
  bool is_linear() const {
    return std::holds_alternative<Box>(v_) || std::holds_alternative<LinearIneq>(v_);
  }

  /// Raw component values c(theta).
  Vector values(const Vector& theta) const;
  /// Gradient of component i (not normalized).
  Vector gradient(const Vector& theta, Index component) const;

  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

struct ConstraintCheck {
  bool satisfied = false;
  Vector values;
};

/// For inequality variants satisfied iff every value >= -tol. For an
/// equality manifold satisfied iff every |c_i| <= tol.
ConstraintCheck check_constraint(const ConstraintSet& cs, const Vector& theta,
                                 double tol = kConstraintTol);

inline bool is_feasible(const ConstraintSet& cs, const Vector& theta, double tol = kConstraintTol) {
  return check_constraint(cs, theta, tol).satisfied;
}

/// Unit normal of component `component` at theta, pointing to the feasible
/// side (grad c / ||grad c||). Throws PreconditionError on a zero gradient.
Vector boundary_normal(const ConstraintSet& cs, const Vector& theta, Index component);

/// Wraps `base` so that infeasible points have log density -inf.
TargetModel restrict_to(TargetModel base, ConstraintSet cs);

/// q-norm, with q = inf giving the max norm.
double qnorm(const Vector& x, double q);

}  // namespace consamp
