#include "consamp/transforms.hpp"

#include <algorithm>

namespace consamp {

namespace {

double clamped_abs(double x) { return std::max(std::abs(x), kCoordinateClamp); }

}  // namespace

DomainTransform::DomainTransform(Kind k, double q, double radius, Vector lower, Vector upper)
    : kind_(k), q_(q), radius_(radius), lower_(std::move(lower)), upper_(std::move(upper)) {}

DomainTransform DomainTransform::qnorm_to_ball(double q, double radius) {
  if (!(q > 0.0)) throw PreconditionError("q-norm transform requires q > 0");
  if (!(radius > 0.0)) throw PreconditionError("q-norm radius must be positive");
  if (std::isinf(q)) return infnorm_to_ball(radius);
  return DomainTransform(Kind::QNormToBall, q, radius, {}, {});
}

DomainTransform DomainTransform::infnorm_to_ball(double radius) {
  if (!(radius > 0.0)) throw PreconditionError("inf-norm radius must be positive");
  return DomainTransform(Kind::InfNormToBall, kInfinity, radius, {}, {});
}

DomainTransform DomainTransform::box_affine(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw DimensionError("box bounds differ in length");
  if (!(lower.array() < upper.array()).all()) throw PreconditionError("box requires lower < upper");
  return DomainTransform(Kind::BoxAffine, 2.0, 1.0, std::move(lower), std::move(upper));
}

Vector DomainTransform::forward(const Vector& beta) const {
  switch (kind_) {
    case Kind::QNormToBall:
      return consamp::qnorm_to_ball(Vector(beta / radius_), q_);
    case Kind::InfNormToBall:
      return consamp::infnorm_to_ball(Vector(beta / radius_));
    case Kind::BoxAffine:
      if (beta.size() != lower_.size()) throw DimensionError("box transform dimension mismatch");
      return consamp::box_affine(lower_, upper_, beta);
  }
  return beta;
}

Vector DomainTransform::inverse(const Vector& theta) const {
  switch (kind_) {
    case Kind::QNormToBall:
      return radius_ * ball_to_qnorm(theta, q_);
    case Kind::InfNormToBall:
      return radius_ * ball_to_infnorm(theta);
    case Kind::BoxAffine:
      if (theta.size() != lower_.size()) throw DimensionError("box transform dimension mismatch");
      return box_affine_inverse(lower_, upper_, theta);
  }
  return theta;
}

double DomainTransform::log_jacobian(const Vector& theta) const {
  const double d = static_cast<double>(theta.size());
  switch (kind_) {
    case Kind::QNormToBall: {
      double s = d * std::log(radius_ * 2.0 / q_);
      if (q_ != 2.0) {
        for (Index i = 0; i < theta.size(); ++i) s += (2.0 / q_ - 1.0) * std::log(clamped_abs(theta[i]));
      }
      return s;
    }
    case Kind::InfNormToBall: {
      // The map scales each ray by ||u||_2/||u||_inf of its direction u, so
      // the determinant is that factor to the power d.
      const double ninf = theta.cwiseAbs().maxCoeff();
      if (ninf == 0.0) return d * std::log(radius_);
      return d * (std::log(radius_) + std::log(theta.norm() / ninf));
    }
    case Kind::BoxAffine:
      return ((upper_ - lower_) / 2.0).array().log().sum();
  }
  return 0.0;
}

Vector DomainTransform::log_jacobian_gradient(const Vector& theta) const {
  const Index n = theta.size();
  Vector g = Vector::Zero(n);
  switch (kind_) {
    case Kind::QNormToBall:
      if (q_ != 2.0) {
        for (Index i = 0; i < n; ++i) {
          if (std::abs(theta[i]) > kCoordinateClamp) g[i] = (2.0 / q_ - 1.0) / theta[i];
        }
      }
      return g;
    case Kind::InfNormToBall: {
      Index k = 0;
      const double ninf = theta.cwiseAbs().maxCoeff(&k);
      if (ninf == 0.0) return g;
      const double n2sq = theta.squaredNorm();
      g = theta / n2sq;
      g[k] -= detail::sign(theta[k]) / ninf;
      return static_cast<double>(n) * g;
    }
    case Kind::BoxAffine:
      return g;
  }
  return g;
}

Vector DomainTransform::pullback(const Vector& theta, const Vector& grad_beta) const {
  switch (kind_) {
    case Kind::QNormToBall: {
      if (q_ == 2.0) return radius_ * grad_beta;
      const double e = 2.0 / q_ - 1.0;
      Vector out(theta.size());
      for (Index i = 0; i < theta.size(); ++i) {
        const double a = e < 0.0 ? clamped_abs(theta[i]) : std::abs(theta[i]);
        out[i] = radius_ * (2.0 / q_) * std::pow(a, e) * grad_beta[i];
      }
      return out;
    }
    case Kind::InfNormToBall: {
      Index k = 0;
      const double ninf = theta.cwiseAbs().maxCoeff(&k);
      if (ninf == 0.0) return radius_ * grad_beta;
      const double n2 = theta.norm();
      const double ratio = n2 / ninf;
      Vector dratio = theta / (n2 * ninf);
      dratio[k] -= ratio / ninf * detail::sign(theta[k]);
      return radius_ * (ratio * grad_beta + dratio * theta.dot(grad_beta));
    }
    case Kind::BoxAffine:
      return ((upper_ - lower_) / 2.0).cwiseProduct(grad_beta);
  }
  return grad_beta;
}

Vector TransformChain::forward(const Vector& beta) const {
  Vector z = beta;
  for (const auto& t : steps_) z = t.forward(z);
  return z;
}

Vector TransformChain::inverse(const Vector& theta) const {
  Vector z = theta;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) z = it->inverse(z);
  return z;
}

double TransformChain::log_jacobian(const Vector& theta) const {
  double s = 0.0;
  Vector z = theta;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    s += it->log_jacobian(z);
    z = it->inverse(z);
  }
  return s;
}

TransformChain::Pulled TransformChain::pull_back(const TargetModel& source, const Vector& theta) const {
  const std::size_t k = steps_.size();
  // points[j] is the input of steps_[j] (points[0] = beta, points[k] = theta).
  std::vector<Vector> points(k + 1);
  points[k] = theta;
  double log_jac = 0.0;
  for (std::size_t j = k; j-- > 0;) {
    log_jac += steps_[j].log_jacobian(points[j + 1]);
    points[j] = steps_[j].inverse(points[j + 1]);
  }
  Pulled out;
  out.beta = points[0];
  out.log_density = source.log_density(out.beta) + log_jac;
  Vector g = source.grad_log_density(out.beta);
  for (std::size_t j = 0; j < k; ++j) {
    g = steps_[j].pullback(points[j + 1], g) + steps_[j].log_jacobian_gradient(points[j + 1]);
  }
  out.gradient = std::move(g);
  return out;
}

TransformChain ball_chain_for(const ConstraintSet& cs) {
  if (const auto* box = std::get_if<Box>(&cs.variant())) {
    return TransformChain({DomainTransform::box_affine(box->lower, box->upper),
                           DomainTransform::infnorm_to_ball()});
  }
  if (const auto* ball = std::get_if<QNormBall>(&cs.variant())) {
    return TransformChain({DomainTransform::qnorm_to_ball(ball->q, ball->r)});
  }
  throw PreconditionError("no ball transform for this constraint type");
}

}  // namespace consamp
