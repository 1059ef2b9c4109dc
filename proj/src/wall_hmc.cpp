#include "consamp/wall_hmc.hpp"

#include "consamp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace consamp {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kBisectionTolerance = 1e-10;

struct Hit {
  double time = std::numeric_limits<double>::infinity();
  std::vector<Index> walls;
};

void add_candidate(Hit& hit, double t, Index wall) {
  if (t < hit.time - kTieTolerance) {
    hit.time = t;
    hit.walls.assign(1, wall);
  } else if (t <= hit.time + kTieTolerance) {
    hit.time = std::min(hit.time, t);
    hit.walls.push_back(wall);
  }
}

// Affine components: c_i(theta + t v) = c_i + t (g_i . v).
Hit linear_hit(const ConstraintSet& cs, const Vector& x, const Vector& v, double horizon) {
  Hit hit;
  const Vector c = cs.values(x);
  Vector rate;
  if (std::holds_alternative<Box>(cs.variant())) {
    rate.resize(2 * x.size());
    rate << v, -v;
  } else {
    rate = std::get<LinearIneq>(cs.variant()).A * v;
  }
  for (Index i = 0; i < c.size(); ++i) {
    if (rate[i] >= 0.0) continue;
    const double t = std::max(0.0, -c[i] / rate[i]);
    if (t <= horizon) add_candidate(hit, t, i);
  }
  return hit;
}

// Nonlinear components: endpoint check, then bisection on each violated
// component. Returns the feasible side of the bracket.
Hit smooth_hit(const ConstraintSet& cs, const Vector& x, const Vector& v, double horizon) {
  Hit hit;
  const Vector end = cs.values(x + horizon * v);
  for (Index i = 0; i < end.size(); ++i) {
    if (end[i] >= 0.0) continue;
    double lo = 0.0;
    double hi = horizon;
    while (hi - lo > kBisectionTolerance) {
      const double mid = 0.5 * (lo + hi);
      if (cs.values(x + mid * v)[i] >= 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    add_candidate(hit, lo, i);
  }
  return hit;
}

}  // namespace

WallMove wall_position_update(const ConstraintSet& cs, Vector position, Vector momentum,
                              double step_size) {
  if (cs.is_equality()) throw PreconditionError("wall reflection needs inequality constraints");
  if (!is_feasible(cs, position)) throw PreconditionError("wall_position_update: infeasible start");
  WallMove out;
  double elapsed = 0.0;
  const bool linear = cs.is_linear();
  const auto* box = std::get_if<Box>(&cs.variant());
  const Index d = position.size();
  while (true) {
    const double remaining = step_size - elapsed;
    if (remaining <= 0.0) break;
    Hit hit = linear ? linear_hit(cs, position, momentum, remaining)
                     : smooth_hit(cs, position, momentum, remaining);
    if (hit.walls.empty()) {
      position += remaining * momentum;
      break;
    }
    position += hit.time * momentum;
    elapsed += hit.time;
    if (box) {
      for (Index w : hit.walls) {
        if (w < d) {
          position[w] = box->lower[w];
        } else {
          position[w - d] = box->upper[w - d];
        }
      }
    }
    std::sort(hit.walls.begin(), hit.walls.end());
    for (Index w : hit.walls) {
      const Vector n = boundary_normal(cs, position, w);
      if (momentum.dot(n) >= 0.0) continue;
      momentum = reflect(momentum, n);
      out.events.push_back({elapsed / step_size, w, position});
      if (static_cast<int>(out.events.size()) > kMaxReflections) {
        throw SamplerError("more than 1000 reflections in one position update");
      }
    }
  }
  out.position = std::move(position);
  out.momentum = std::move(momentum);
  return out;
}

PhaseState wall_leapfrog(const TargetModel& model, const ConstraintSet& cs, PhaseState s,
                         double step_size, int steps, long* bounces) {
  Vector grad = model.grad_log_density(s.position);
  for (int l = 0; l < steps; ++l) {
    if (!grad.allFinite()) throw DivergenceError("non-finite gradient along wall trajectory");
    s.momentum += 0.5 * step_size * grad;
    WallMove move = wall_position_update(cs, std::move(s.position), std::move(s.momentum), step_size);
    s.position = std::move(move.position);
    s.momentum = std::move(move.momentum);
    if (bounces) *bounces += static_cast<long>(move.events.size());
    grad = model.grad_log_density(s.position);
    if (!grad.allFinite()) throw DivergenceError("non-finite gradient along wall trajectory");
    s.momentum += 0.5 * step_size * grad;
  }
  return s;
}

StepResult wall_hmc_step(const TargetModel& model, const ConstraintSet& cs, const Vector& current,
                         const LeapfrogConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!is_feasible(cs, current)) throw PreconditionError("wall_hmc_step: current state is infeasible");
  StepResult out{current, false, 0.0, 0};
  PhaseState start{current, rng.normal_vector(current.size())};
  const double eps = cfg.draw_step(rng);
  const double h0 = hamiltonian(model, start);
  PhaseState end;
  try {
    end = wall_leapfrog(model, cs, start, eps, cfg.steps, &out.bounces);
  } catch (const DivergenceError&) {
    rng.uniform();
    return out;
  }
  const auto [accepted, prob] = metropolis(hamiltonian(model, end) - h0, rng);
  out.accept_prob = prob;
  if (accepted) {
    out.position = std::move(end.position);
    out.accepted = true;
  }
  return out;
}

}  // namespace consamp
