#include "consamp/applications/tmg.hpp"
#include "consamp/chain.hpp"
#include "consamp/error.hpp"
#include "consamp/hmc.hpp"
#include "oracles.hpp"

#include <Eigen/LU>
#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace consamp;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TargetModel correlated_gaussian() {
  Matrix cov(2, 2);
  cov << 1.0, 0.6, 0.6, 0.8;
  return gaussian_model(vec({0.2, -0.1}), cov);
}

// Non-quadratic potential U = x^4/4 + y^2/2 + x y / 2.
TargetModel quartic() {
  TargetModel m;
  m.dim = 2;
  m.log_density = [](const Vector& t) { return -(std::pow(t[0], 4) / 4 + t[1] * t[1] / 2 + t[0] * t[1] / 2); };
  m.grad_log_density = [](const Vector& t) -> Vector {
    return -vec({std::pow(t[0], 3) + t[1] / 2, t[1] + t[0] / 2});
  };
  return m;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("free particle moves in a straight line") {
  const PhaseState s{vec({0.1, 0.2}), vec({1.0, -0.5})};
  const PhaseState e = leapfrog(flat_model(2), s, 0.1, 7);
  CHECK(e.position.isApprox(s.position + 0.7 * s.momentum));
  CHECK(e.momentum == s.momentum);
}

TEST_CASE("1D Gaussian energy error against a fine-step reference") {
  const TargetModel m = gaussian_model(Vector::Zero(1), Matrix::Identity(1, 1));
  const PhaseState s{vec({0.8}), vec({-0.3})};
  const PhaseState coarse = leapfrog(m, s, 0.01, 100);
  CHECK(std::abs(hamiltonian(m, coarse) - hamiltonian(m, s)) <= 1e-3);
  const PhaseState fine = leapfrog(m, s, 1e-5, 100000);
  CHECK(std::abs(hamiltonian(m, fine) - hamiltonian(m, s)) < 1e-9);
  CHECK((coarse.position - fine.position).norm() < 1e-4);
  // Analytic flow: rotation by angle 1.
  CHECK(fine.position[0] == doctest::Approx(0.8 * std::cos(1.0) - 0.3 * std::sin(1.0)).epsilon(1e-8));
}

TEST_CASE("leapfrog is reversible") {
  Rng rng(11, 0);
  for (const auto& m : {correlated_gaussian(), quartic()}) {
    for (int k = 0; k < 50; ++k) {
      const PhaseState s{rng.normal_vector(2), rng.normal_vector(2)};
      PhaseState e = leapfrog(m, s, 0.1, 25);
      e.momentum = -e.momentum;
      const PhaseState back = leapfrog(m, e, 0.1, 25);
      CHECK((back.position - s.position).norm() <= 1e-10);
      CHECK((back.momentum + s.momentum).norm() <= 1e-10);
    }
  }
}

TEST_CASE("one leapfrog step preserves phase-space volume") {
  Rng rng(12, 0);
  for (const auto& m : {correlated_gaussian(), quartic()}) {
    for (int k = 0; k < 20; ++k) {
      const Vector z0 = rng.normal_vector(4);
      auto step = [&](const Vector& z) -> Vector {
        const PhaseState e = leapfrog(m, PhaseState{z.head(2), z.tail(2)}, 0.2, 1);
        Vector out(4);
        out << e.position, e.momentum;
        return out;
      };
      const Matrix J = oracle::fd_jacobian(step, z0, 1e-5);
      CHECK(std::abs(J.determinant() - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("energy error is second order in the step size") {
  Rng rng(13, 0);
  const TargetModel m = correlated_gaussian();
  std::vector<double> coarse, fine;
  for (int k = 0; k < 100; ++k) {
    const PhaseState s{rng.normal_vector(2), rng.normal_vector(2)};
    const double h0 = hamiltonian(m, s);
    coarse.push_back(std::abs(hamiltonian(m, leapfrog(m, s, 0.2, 10)) - h0));
    fine.push_back(std::abs(hamiltonian(m, leapfrog(m, s, 0.05, 40)) - h0));
  }
  const double ratio = median(coarse) / median(fine);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("configuration and mass matrix contracts") {
  CHECK_THROWS_AS((LeapfrogConfig{-0.1, 10}.validate()), PreconditionError);
  CHECK_THROWS_AS((LeapfrogConfig{0.1, 0}.validate()), PreconditionError);
  CHECK_THROWS_AS(MassMatrix(Matrix::Constant(2, 2, 1.0)), PreconditionError);
  CHECK_THROWS_AS(MassMatrix(Matrix::Identity(2, 3)), DimensionError);

  Matrix M(2, 2);
  M << 2.0, 0.5, 0.5, 1.0;
  const MassMatrix mass(M);
  const Vector phi = vec({1.0, -2.0});
  CHECK(mass.kinetic(phi) == doctest::Approx(0.5 * phi.dot(M.inverse() * phi)));
  CHECK(mass.kinetic(phi) >= 0.0);
  Rng rng(14, 0);
  Matrix draws(50000, 2);
  for (Index i = 0; i < draws.rows(); ++i) draws.row(i) = mass.sample(rng, 2).transpose();
  const Matrix cov = draws.transpose() * draws / static_cast<double>(draws.rows());
  CHECK((cov - M).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("divergent trajectories raise and are rejected") {
  TargetModel bad = flat_model(1);
  bad.grad_log_density = [](const Vector& t) -> Vector {
    return Vector::Constant(1, t[0] > 1.0 ? std::nan("") : 0.0);
  };
  CHECK_THROWS_AS(leapfrog(bad, PhaseState{vec({0.0}), vec({1.0})}, 0.5, 10), DivergenceError);
  Rng rng(15, 0);
  CHECK_FALSE(metropolis(std::nan(""), rng).first);
  CHECK_FALSE(metropolis(1001.0, rng).first);
  CHECK(metropolis(-1.0, rng).second == 1.0);
  CHECK(metropolis(0.5, rng).second == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("tiny steps are always accepted") {
  Rng rng(16, 0);
  const TargetModel m = correlated_gaussian();
  Vector x = vec({0.3, 0.1});
  for (int k = 0; k < 200; ++k) {
    const StepResult r = hmc_step(m, nullptr, x, LeapfrogConfig{1e-8, 1, 0.0}, rng);
    CHECK(r.accept_prob == doctest::Approx(1.0).epsilon(1e-10));
    x = r.position;
  }
}

TEST_CASE("HMC on a 2D standard Gaussian matches direct sampling") {
  Rng rng(17, 0);
  const TargetModel m = gaussian_model(Vector::Zero(2), Matrix::Identity(2, 2));
  const LeapfrogConfig cfg{0.1, 20};
  const ChainResult c = run_chain([&](const Vector& x, Rng& r) { return hmc_step(m, nullptr, x, cfg, r); },
                                  Vector::Zero(2), 100000, 1000, rng);
  const Vector mean = c.draws.colwise().mean().transpose();
  const Matrix centered = c.draws.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(c.draws.rows() - 1);
  CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("HMC draws pass a KS test on a 1D Gaussian") {
  Rng rng(18, 0);
  const TargetModel m = gaussian_model(Vector::Zero(1), Matrix::Identity(1, 1));
  const LeapfrogConfig cfg{0.15, 10};
  const ChainResult c = run_chain([&](const Vector& x, Rng& r) { return hmc_step(m, nullptr, x, cfg, r); },
                                  Vector::Zero(1), 100000, 1000, rng);
  std::vector<double> x(c.draws.data(), c.draws.data() + c.draws.rows());
  CHECK(oracle::ks_statistic(x, oracle::normal_cdf) < oracle::ks_critical_1pct(x.size()));
}

TEST_CASE("rejection handling collapses in 100 dimensions") {
  Rng rng(19, 0);
  const TmgProblem p = tmg_preset(100);
  const LeapfrogConfig cfg{0.05, 10};
  const ChainResult c =
      run_chain([&](const Vector& x, Rng& r) { return hmc_step(p.model, &p.constraints, x, cfg, r); },
                tmg_initial_point(p), 2000, 0, rng);
  CHECK(static_cast<double>(c.accepted) / static_cast<double>(c.iterations) < 0.2);
  CHECK_THROWS_AS(hmc_step(p.model, &p.constraints, Vector::Constant(100, -1.0), cfg, rng), PreconditionError);
}

TEST_CASE("random-walk Metropolis rejects infeasible proposals") {
  const ConstraintSet box(Box{vec({0.0}), vec({1.0})});
  const TargetModel m = restrict_to(flat_model(1), box);
  Rng rng(20, 0);
  const int n = 100000;
  int accepted = 0;
  for (int k = 0; k < n; ++k) {
    const StepResult r = rwm_step(m, &box, vec({0.5}), 1.0, rng);
    if (r.accepted) {
      ++accepted;
      CHECK(r.accept_prob == 1.0);
    } else {
      CHECK(r.position[0] == 0.5);
    }
  }
  // Feasible-proposal probability P(|z| < 0.5).
  const double truth = 2.0 * oracle::normal_cdf(0.5) - 1.0;
  const double frac = static_cast<double>(accepted) / n;
  CHECK(std::abs(frac - truth) < 3.0 * std::sqrt(truth * (1 - truth) / n));
}

TEST_CASE("RWM reproduces the bivariate truncated Gaussian mean") {
  const TmgProblem p = tmg_preset(2);
  const auto s = default_settings("rwm", 2);
  std::vector<Matrix> reps;
  for (int r = 0; r < 10; ++r) {
    Rng rng(42, static_cast<std::uint64_t>(r));
    reps.push_back(run_tmg_chain(p, "rwm", s, 20000, 2000, rng).draws);
  }
  const MomentSummary m = summarize(reps);
  CHECK(std::abs(m.mean[0] - 0.7906) < 0.01);
  CHECK(std::abs(m.mean[1] - 0.4889) < 0.01);
}
