#include "consamp/exact_tmg.hpp"

#include "consamp/error.hpp"
#include "consamp/wall_hmc.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>

namespace consamp {

namespace {

constexpr double kGrazingTolerance = 1e-10;
constexpr double kDepartureTolerance = 1e-9;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

LinearIneq box_walls(const Vector& lower, const Vector& upper) {
  const Index d = lower.size();
  if (upper.size() != d) throw DimensionError("box bounds differ in length");
  LinearIneq w;
  w.A = Matrix::Zero(2 * d, d);
  w.A.topRows(d).setIdentity();
  w.A.bottomRows(d) = -Matrix::Identity(d, d);
  w.b.resize(2 * d);
  w.b << -lower, upper;
  return w;
}

WhitenedTmg::WhitenedTmg(const TmgSpec& spec) : mean_(spec.mean) {
  const Index d = spec.mean.size();
  if (spec.covariance.rows() != d || spec.covariance.cols() != d || spec.walls.A.cols() != d ||
      spec.walls.A.rows() != spec.walls.b.size()) {
    throw DimensionError("inconsistent truncated Gaussian dimensions");
  }
  Eigen::LLT<Matrix> llt(spec.covariance);
  if (llt.info() != Eigen::Success) throw PreconditionError("covariance is not positive definite");
  chol_ = llt.matrixL();
  F_ = spec.walls.A * chol_;
  g_ = spec.walls.A * spec.mean + spec.walls.b;
  wall_norms_ = F_.rowwise().norm();
  if ((wall_norms_.array() == 0.0).any()) throw PreconditionError("zero wall row");
}

Vector WhitenedTmg::whiten(const Vector& theta) const {
  return chol_.triangularView<Eigen::Lower>().solve(theta - mean_);
}

Vector WhitenedTmg::unwhiten(const Vector& x) const { return mean_ + chol_ * x; }

bool WhitenedTmg::feasible(const Vector& x, double tol) const {
  return ((F_ * x + g_).array() >= -tol).all();
}

WhitenedTmg whiten(const TmgSpec& spec) { return WhitenedTmg(spec); }

std::optional<WallHit> first_hit(const Vector& x0, const Vector& v0, const Matrix& F, const Vector& g,
                                 double horizon, double min_time) {
  const Vector u = F * x0;
  const Vector w = F * v0;
  std::optional<WallHit> best;
  for (Index j = 0; j < F.rows(); ++j) {
    // f(t) = u cos t + w sin t + g = rho cos(t - psi) + g
    const double rho = std::hypot(u[j], w[j]);
    if (rho <= std::abs(g[j])) continue;
    const double psi = std::atan2(w[j], u[j]);
    // Exit root: f decreasing through zero.
    const double alpha = std::acos(-g[j] / rho);
    if (rho * std::sin(alpha) < kGrazingTolerance) continue;
    double t = psi + alpha;
    t -= kTwoPi * std::floor((t - min_time) / kTwoPi);
    if (t <= min_time) t += kTwoPi;
    if (t > horizon) continue;
    if (!best || t < best->time) best = WallHit{t, j};
  }
  return best;
}

ExactTmgResult exact_tmg_step(const WhitenedTmg& tmg, const Vector& current, double travel_time, Rng& rng) {
  if (!(travel_time > 0.0)) throw PreconditionError("travel time must be positive");
  Vector x = tmg.whiten(current);
  if (!tmg.feasible(x, 1e-9)) throw PreconditionError("exact_tmg_step: current state is infeasible");
  Vector v = rng.normal_vector(x.size());
  const Matrix& F = tmg.wall_matrix();
  const Vector& g = tmg.wall_offset();
  ExactTmgResult out;
  double remaining = travel_time;
  double min_time = 0.0;
  while (true) {
    const auto hit = first_hit(x, v, F, g, remaining, min_time);
    if (!hit) {
      std::tie(x, v) = exact_trajectory(x, v, remaining);
      break;
    }
    std::tie(x, v) = exact_trajectory(x, v, hit->time);
    remaining -= hit->time;
    const Vector n = F.row(hit->wall).transpose().normalized();
    v = reflect(v, n);
    min_time = kDepartureTolerance;
    if (++out.bounces > kMaxReflections) throw SamplerError("more than 1000 reflections in one exact step");
  }
  out.position = tmg.unwhiten(x);
  return out;
}

}  // namespace consamp
