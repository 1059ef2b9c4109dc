#include "consamp/hmc.hpp"

#include "consamp/error.hpp"

#include <cmath>

namespace consamp {

MassMatrix::MassMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("mass matrix must be square");
  if (!m.isApprox(m.transpose())) throw PreconditionError("mass matrix must be symmetric");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw PreconditionError("mass matrix must be positive definite");
  llt_ = std::move(llt);
}

Vector MassMatrix::velocity(const Vector& phi) const {
  if (!llt_) return phi;
  return llt_->solve(phi);
}

Vector MassMatrix::sample(Rng& rng, Index dim) const {
  Vector z = rng.normal_vector(dim);
  if (!llt_) return z;
  return llt_->matrixL() * z;
}

void LeapfrogConfig::validate() const {
  if (!(step_size > 0.0)) throw PreconditionError("step size must be positive");
  if (steps < 1) throw PreconditionError("number of leapfrog steps must be >= 1");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw PreconditionError("jitter must lie in [0, 1)");
}

PhaseState leapfrog(const TargetModel& model, PhaseState s, double step_size, int steps,
                    const MassMatrix& mass) {
  Vector grad = model.grad_log_density(s.position);
  for (int l = 0; l < steps; ++l) {
    if (!grad.allFinite()) throw DivergenceError("non-finite gradient along leapfrog trajectory");
    s.momentum += 0.5 * step_size * grad;
    s.position += step_size * mass.velocity(s.momentum);
    grad = model.grad_log_density(s.position);
    if (!grad.allFinite() || !s.position.allFinite()) {
      throw DivergenceError("non-finite state along leapfrog trajectory");
    }
    s.momentum += 0.5 * step_size * grad;
  }
  return s;
}

double hamiltonian(const TargetModel& model, const PhaseState& s, const MassMatrix& mass) {
  return model.potential(s.position) + mass.kinetic(s.momentum);
}

std::pair<bool, double> metropolis(double delta_h, Rng& rng) {
  if (!std::isfinite(delta_h) || delta_h > kDivergenceThreshold) {
    rng.uniform();
    return {false, 0.0};
  }
  const double prob = delta_h <= 0.0 ? 1.0 : std::exp(-delta_h);
  return {rng.uniform() < prob, prob};
}

StepResult hmc_step(const TargetModel& model, const ConstraintSet* cs, const Vector& current,
                    const LeapfrogConfig& cfg, Rng& rng, const MassMatrix& mass) {
  cfg.validate();
  if (cs && !is_feasible(*cs, current)) throw PreconditionError("hmc_step: current state is infeasible");
  StepResult out{current, false, 0.0, 0};
  PhaseState start{current, mass.sample(rng, current.size())};
  const double eps = cfg.draw_step(rng);
  const double h0 = hamiltonian(model, start, mass);
  PhaseState end;
  try {
    end = leapfrog(model, start, eps, cfg.steps, mass);
  } catch (const DivergenceError&) {
    rng.uniform();
    return out;
  }
  if (cs && !is_feasible(*cs, end.position)) {
    rng.uniform();
    return out;
  }
  const auto [accepted, prob] = metropolis(hamiltonian(model, end, mass) - h0, rng);
  out.accept_prob = prob;
  if (accepted) {
    out.position = std::move(end.position);
    out.accepted = true;
  }
  return out;
}

StepResult rwm_step(const TargetModel& model, const ConstraintSet* cs, const Vector& current,
                    double proposal_scale, Rng& rng) {
  if (!(proposal_scale > 0.0)) throw PreconditionError("proposal scale must be positive");
  StepResult out{current, false, 0.0, 0};
  Vector proposal = current + proposal_scale * rng.normal_vector(current.size());
  if (cs && !is_feasible(*cs, proposal)) {
    rng.uniform();
    return out;
  }
  const auto [accepted, prob] = metropolis(model.log_density(current) - model.log_density(proposal), rng);
  out.accept_prob = prob;
  if (accepted) {
    out.position = std::move(proposal);
    out.accepted = true;
  }
  return out;
}

}  // namespace consamp
