#include "consamp/rattle.hpp"

#include "consamp/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace consamp {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Eigen::LDLT<Matrix> gram(const Matrix& jac) {
  Eigen::LDLT<Matrix> g(jac * jac.transpose());
  if (g.info() != Eigen::Success || g.rcond() < 1e-14) throw StepFailure("singular constraint Jacobian");
  return g;
}

}  // namespace

Vector cotangent_project(const Matrix& jac, const Vector& v) {
  return v - jac.transpose() * gram(jac).solve(jac * v);
}

RattleState rattle_step(const TargetModel& model, const EqualityManifold& manifold, const RattleState& s,
                        double step_size, RattleDiagnostics* diag) {
  const double eps = step_size;
  const Matrix jac0 = manifold.jacobian(s.position);
  const auto gram0 = gram(jac0);
  const Vector grad_u0 = model.grad_potential(s.position);
  // Unconstrained drift; the multiplier term moves along the rows of jac0.
  const Vector drift = s.position + eps * s.momentum - 0.5 * eps * eps * grad_u0;
  const double scale = 0.5 * eps * eps;

  Vector lambda = Vector::Zero(jac0.rows());
  Vector next = drift;
  Vector c = manifold.c(next);
  int it = 0;
  while (inf_norm(c) > kNewtonTol) {
    if (++it > kNewtonMaxIterations || !c.allFinite()) {
      throw StepFailure("RATTLE position multiplier did not converge");
    }
    // Symmetric Newton: d c / d lambda approximated by -scale * jac0 jac0^T.
    lambda += gram0.solve(c) / scale;
    next = drift - scale * jac0.transpose() * lambda;
    c = manifold.c(next);
    if (diag) diag->residuals.push_back(inf_norm(c));
  }
  if (diag) diag->newton_iterations = it;

  RattleState out;
  out.position = next;
  out.lambda = lambda;
  const Vector half = s.momentum - 0.5 * eps * (grad_u0 + jac0.transpose() * lambda);
  const Matrix jac1 = manifold.jacobian(next);
  const Vector pre = half - 0.5 * eps * model.grad_potential(next);
  // mu makes jac1 * phi = 0: phi = pre - (eps/2) jac1^T mu.
  out.mu = gram(jac1).solve(jac1 * pre) * (2.0 / eps);
  out.momentum = pre - 0.5 * eps * jac1.transpose() * out.mu;
  if (!out.position.allFinite() || !out.momentum.allFinite()) throw StepFailure("non-finite RATTLE state");
  return out;
}

StepResult chmc_step(const TargetModel& model, const EqualityManifold& manifold, const Vector& current,
                     const LeapfrogConfig& cfg, Rng& rng) {
  cfg.validate();
  if (inf_norm(manifold.c(current)) > kManifoldTol) {
    throw PreconditionError("chmc_step: current state is off the manifold");
  }
  StepResult out{current, false, 0.0, 0};
  RattleState s;
  s.position = current;
  s.momentum = cotangent_project(manifold.jacobian(current), rng.normal_vector(current.size()));
  const double eps = cfg.draw_step(rng);
  const double h0 = model.potential(s.position) + 0.5 * s.momentum.squaredNorm();
  try {
    for (int l = 0; l < cfg.steps; ++l) s = rattle_step(model, manifold, s, eps);
  } catch (const StepFailure&) {
    rng.uniform();
    return out;
  }
  const double h1 = model.potential(s.position) + 0.5 * s.momentum.squaredNorm();
  const auto [accepted, prob] = metropolis(h1 - h0, rng);
  out.accept_prob = prob;
  if (accepted) {
    out.position = std::move(s.position);
    out.accepted = true;
  }
  return out;
}

}  // namespace consamp
