#include "consamp/model.hpp"

#include "consamp/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace consamp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(const Vector& theta, Index dim) {
  if (theta.size() != dim) {
    throw DimensionError("expected a vector of length " + std::to_string(dim) + ", got " +
                         std::to_string(theta.size()));
  }
}

}  // namespace

TargetModel gaussian_model(Vector mean, const Matrix& covariance) {
  const Index d = mean.size();
  if (covariance.rows() != d || covariance.cols() != d) {
    throw DimensionError("covariance shape does not match mean");
  }
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) throw PreconditionError("covariance is not positive definite");
  Matrix precision = llt.solve(Matrix::Identity(d, d));
  TargetModel m;
  m.dim = d;
  m.log_density = [mean, precision](const Vector& x) {
    const Vector r = x - mean;
    return -0.5 * r.dot(precision * r);
  };
  m.grad_log_density = [mean, precision](const Vector& x) -> Vector {
    return -(precision * (x - mean));
  };
  return m;
}

TargetModel flat_model(Index dim) {
  TargetModel m;
  m.dim = dim;
  m.log_density = [](const Vector&) { return 0.0; };
  m.grad_log_density = [dim](const Vector&) -> Vector { return Vector::Zero(dim); };
  return m;
}

double qnorm(const Vector& x, double q) {
  if (std::isinf(q)) return x.cwiseAbs().maxCoeff();
  if (q == 2.0) return x.norm();
  return std::pow(x.cwiseAbs().array().pow(q).sum(), 1.0 / q);
}

ConstraintSet::ConstraintSet(Variant v) : v_(std::move(v)) {
  std::visit(Overloaded{
                 [](const Box& b) {
                   if (b.lower.size() != b.upper.size() || b.lower.size() == 0) {
                     throw DimensionError("box bounds must be nonempty and of equal length");
                   }
                   if (!(b.lower.array() < b.upper.array()).all()) {
                     throw PreconditionError("box requires lower < upper componentwise");
                   }
                 },
                 [](const LinearIneq& l) {
                   if (l.A.rows() != l.b.size() || l.A.rows() == 0) {
                     throw DimensionError("linear constraint rows of A and b disagree");
                   }
                 },
                 [](const QNormBall& q) {
                   if (q.dim < 1) throw DimensionError("q-norm ball needs dim >= 1");
                   if (!(q.r > 0.0)) throw PreconditionError("q-norm ball requires r > 0");
                   if (!(q.q > 0.0)) throw PreconditionError("q-norm ball requires q > 0 or q = inf");
                 },
                 [](const SmoothIneq& s) {
                   if (s.dim < 1 || !s.c || !s.jacobian) throw PreconditionError("incomplete smooth constraint");
                 },
                 [](const EqualityManifold& s) {
                   if (s.dim < 1 || !s.c || !s.jacobian) throw PreconditionError("incomplete manifold constraint");
                 },
             },
             v_);
}

Index ConstraintSet::dim() const {
  return std::visit(Overloaded{
                        [](const Box& b) { return b.lower.size(); },
                        [](const LinearIneq& l) { return l.A.cols(); },
                        [](const QNormBall& q) { return q.dim; },
                        [](const SmoothIneq& s) { return s.dim; },
                        [](const EqualityManifold& s) { return s.dim; },
                    },
                    v_);
}

Index ConstraintSet::size() const {
  return std::visit(Overloaded{
                        [](const Box& b) { return 2 * b.lower.size(); },
                        [](const LinearIneq& l) { return l.A.rows(); },
                        [](const QNormBall&) { return Index{1}; },
                        [](const SmoothIneq& s) { return s.c(Vector::Zero(s.dim)).size(); },
                        [](const EqualityManifold& s) { return s.c(Vector::Zero(s.dim)).size(); },
                    },
                    v_);
}

Vector ConstraintSet::values(const Vector& theta) const {
  require_dim(theta, dim());
  return std::visit(Overloaded{
                        [&](const Box& b) -> Vector {
                          Vector out(2 * theta.size());
                          out << theta - b.lower, b.upper - theta;
                          return out;
                        },
                        [&](const LinearIneq& l) -> Vector { return l.A * theta + l.b; },
                        [&](const QNormBall& q) -> Vector {
                          return Vector::Constant(1, q.r - qnorm(theta, q.q));
                        },
                        [&](const SmoothIneq& s) -> Vector { return s.c(theta); },
                        [&](const EqualityManifold& s) -> Vector { return s.c(theta); },
                    },
                    v_);
}

Vector ConstraintSet::gradient(const Vector& theta, Index component) const {
  require_dim(theta, dim());
  if (component < 0 || component >= size()) throw DimensionError("constraint component out of range");
  const Index d = theta.size();
  return std::visit(
      Overloaded{
          [&](const Box&) -> Vector {
            Vector g = Vector::Zero(d);
            if (component < d) {
              g[component] = 1.0;
            } else {
              g[component - d] = -1.0;
            }
            return g;
          },
          [&](const LinearIneq& l) -> Vector { return l.A.row(component).transpose(); },
          [&](const QNormBall& q) -> Vector {
            Vector g = Vector::Zero(d);
            if (std::isinf(q.q)) {
              Index k = 0;
              const double m = theta.cwiseAbs().maxCoeff(&k);
              if (m > 0.0) g[k] = theta[k] > 0 ? -1.0 : 1.0;
              return g;
            }
            const double norm = qnorm(theta, q.q);
            if (norm == 0.0) return g;
            for (Index i = 0; i < d; ++i) {
              const double a = std::abs(theta[i]);
              if (a == 0.0) continue;
              const double sgn = theta[i] > 0 ? 1.0 : -1.0;
              g[i] = -sgn * std::pow(a / norm, q.q - 1.0);
            }
            return g;
          },
          [&](const SmoothIneq& s) -> Vector { return s.jacobian(theta).row(component).transpose(); },
          [&](const EqualityManifold& s) -> Vector {
            return s.jacobian(theta).row(component).transpose();
          },
      },
      v_);
}

ConstraintCheck check_constraint(const ConstraintSet& cs, const Vector& theta, double tol) {
  ConstraintCheck out;
  out.values = cs.values(theta);
  if (cs.is_equality()) {
    out.satisfied = out.values.size() == 0 || out.values.cwiseAbs().maxCoeff() <= tol;
  } else {
    out.satisfied = out.values.size() == 0 || out.values.minCoeff() >= -tol;
  }
  return out;
}

Vector boundary_normal(const ConstraintSet& cs, const Vector& theta, Index component) {
  Vector g = cs.gradient(theta, component);
  const double n = g.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw PreconditionError("degenerate boundary: zero constraint gradient");
  }
  return g / n;
}

TargetModel restrict_to(TargetModel base, ConstraintSet cs) {
  if (base.dim != cs.dim()) throw DimensionError("model and constraint dimensions differ");
  auto inner = base.log_density;
  base.log_density = [inner, cs = std::move(cs)](const Vector& x) {
    if (!is_feasible(cs, x)) return -kInfinity;
    return inner(x);
  };
  return base;
}

}  // namespace consamp
