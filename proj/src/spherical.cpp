#include "consamp/spherical.hpp"

#include "consamp/error.hpp"

namespace consamp {

namespace {

double clamped_last(const Vector& x) { return std::max(std::abs(x[x.size() - 1]), kEquatorClamp); }

// Keeps x on the sphere and v tangent against round-off drift.
void renormalize(SphericalState& s) {
  s.position /= s.position.norm();
  s.velocity = tangent_project(s.position, s.velocity);
}

void fold(SphericalState& s) {
  const Index last = s.position.size() - 1;
  if (s.position[last] < 0.0) {
    s.position[last] = -s.position[last];
    s.velocity[last] = -s.velocity[last];
  }
}

}  // namespace

EffectivePotential::EffectivePotential(TargetModel base, TransformChain chain)
    : base_(std::move(base)), chain_(std::move(chain)) {}

double EffectivePotential::value(const Vector& x) const {
  const Vector theta = deaugment(x);
  const double log_p = base_.log_density(chain_.inverse(theta)) + chain_.log_jacobian(theta);
  return -log_p - std::log(clamped_last(x));
}

Vector EffectivePotential::gradient(const Vector& x) const {
  const Index d = x.size() - 1;
  const auto pulled = chain_.pull_back(base_, x.head(d));
  Vector g(d + 1);
  g.head(d) = -pulled.gradient;
  const double last = x[d];
  g[d] = std::abs(last) > kEquatorClamp ? -1.0 / last : 0.0;
  return g;
}

SphericalState sph_leapfrog(const SpherePotential& pot, SphericalState s, double step_size, int steps) {
  const bool identify = pot.identify_hemispheres();
  Vector grad = pot.gradient(s.position);
  for (int l = 0; l < steps; ++l) {
    if (!grad.allFinite()) throw DivergenceError("non-finite gradient on the sphere");
    s.velocity -= 0.5 * step_size * tangent_project(s.position, grad);
    std::tie(s.position, s.velocity) = geodesic_update(s.position, s.velocity, step_size);
    renormalize(s);
    if (identify) fold(s);
    grad = pot.gradient(s.position);
    if (!grad.allFinite()) throw DivergenceError("non-finite gradient on the sphere");
    s.velocity -= 0.5 * step_size * tangent_project(s.position, grad);
  }
  return s;
}

StepResult sph_hmc_step(const SpherePotential& pot, const Vector& current, const LeapfrogConfig& cfg, Rng& rng) {
  cfg.validate();
  if (current.size() != pot.sphere_dim() + 1) throw DimensionError("sphere point has wrong dimension");
  if (std::abs(current.norm() - 1.0) > 1e-10) throw PreconditionError("sph_hmc_step: point is not on the sphere");
  StepResult out{current, false, 0.0, 0};
  SphericalState s{current, tangent_project(current, rng.normal_vector(current.size()))};
  const double eps = cfg.draw_step(rng);
  const double h0 = pot.value(s.position) + 0.5 * s.velocity.squaredNorm();
  try {
    s = sph_leapfrog(pot, std::move(s), eps, cfg.steps);
  } catch (const DivergenceError&) {
    rng.uniform();
    return out;
  }
  const double h1 = pot.value(s.position) + 0.5 * s.velocity.squaredNorm();
  const auto [accepted, prob] = metropolis(h1 - h0, rng);
  out.accept_prob = prob;
  if (accepted) {
    out.position = std::move(s.position);
    out.accepted = true;
  }
  return out;
}

}  // namespace consamp
