#include "consamp/applications/bridge.hpp"
#include "consamp/applications/density.hpp"
#include "consamp/applications/tmg.hpp"
#include "consamp/error.hpp"
#include "consamp/registry.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <numbers>

using namespace consamp;

namespace {

Matrix unit_grid(Index n) {
  Matrix g(n, 1);
  for (Index i = 0; i < n; ++i) g(i, 0) = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return g;
}

Matrix mixture_data(Index n, Rng& rng) {
  const auto mix = reference_mixture();
  Matrix data(n, 1);
  for (Index i = 0; i < n; ++i) data(i, 0) = mix.sample(rng);
  return data;
}

}  // namespace

TEST_CASE("truncated Gaussian presets") {
  const TmgProblem p2 = tmg_preset(2);
  CHECK(p2.spec.mean == Vector::Zero(2));
  Matrix cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  CHECK(p2.spec.covariance == cov);
  CHECK(p2.lower == Vector::Zero(2));
  CHECK(p2.upper == (Vector(2) << 5.0, 1.0).finished());

  for (Index d : {10, 100}) {
    const TmgProblem p = tmg_preset(d);
    CHECK(p.lower == Vector::Zero(d));
    CHECK(p.upper[0] == 5.0);
    CHECK((p.upper.tail(d - 1).array() == 0.5).all());
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        CHECK(p.spec.covariance(i, j) == 1.0 / (1.0 + static_cast<double>(std::abs(i - j))));
    CHECK(is_feasible(p.constraints, tmg_initial_point(p)));
  }
  CHECK_THROWS_AS(tmg_preset(1), PreconditionError);
}

TEST_CASE("benchmark rejects unknown samplers with the valid list") {
  BenchmarkOptions o;
  o.samples = 100;
  o.burnin = 0;
  try {
    tmg_benchmark(tmg_preset(2), {"exact", "gibbs"}, o);
    FAIL("expected an error");
  } catch (const PreconditionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("gibbs") != std::string::npos);
    for (const auto& n : tmg_sampler_names()) CHECK(msg.find(n) != std::string::npos);
  }
}

TEST_CASE("benchmark reports for the exact sampler") {
  BenchmarkOptions o;
  o.samples = 20000;
  o.burnin = 1000;
  o.replicates = 10;
  o.seed = 70;
  const auto entries = tmg_benchmark(tmg_preset(2), {"rwm", "exact"}, o);
  REQUIRE(entries.size() == 2);
  const RunReport& exact = entries[1].report;
  REQUIRE(exact.moment_estimates);
  CHECK(std::abs(exact.moment_estimates->mean[0] - 0.7906) < 0.0025);
  CHECK(std::abs(exact.moment_estimates->mean[1] - 0.4889) < 0.0025);
  CHECK(exact.moment_estimates->replicates == 10);
  REQUIRE(entries[0].report.speedup);
  CHECK(*entries[0].report.speedup == 1.0);
  CHECK(*exact.speedup > 1.0);
}

TEST_CASE("ordinary least squares") {
  Rng rng(71, 0);
  const Vector y = rng.normal_vector(5);
  CHECK((ols_fit(Matrix::Identity(5, 5), y) - y).norm() < 1e-14);

  const Matrix X = Matrix::NullaryExpr(50, 4, [&]() { return rng.normal(); });
  const Vector beta = rng.normal_vector(4);
  CHECK((ols_fit(X, X * beta) - beta).norm() < 1e-10);

  for (int k = 0; k < 20; ++k) {
    const Matrix A = Matrix::NullaryExpr(40, 6, [&]() { return rng.normal(); });
    const Vector b = rng.normal_vector(40);
    const Vector fit = ols_fit(A, b);
    const Vector qr = A.colPivHouseholderQr().solve(b);
    CHECK((fit - qr).norm() < 1e-8);
    CHECK((A.transpose() * (b - A * fit)).cwiseAbs().maxCoeff() < 1e-8);
  }

  Matrix S = Matrix::NullaryExpr(20, 3, [&]() { return rng.normal(); });
  S.col(2) = S.col(0) + S.col(1);
  CHECK_THROWS_AS(ols_fit(S, rng.normal_vector(20)), PreconditionError);
  CHECK_THROWS_AS(ols_fit(Matrix::Ones(2, 3), rng.normal_vector(2)), PreconditionError);
}

TEST_CASE("standardized regression data") {
  Rng rng(72, 0);
  Vector bt(3);
  bt << 1, 0, -2;
  RegressionData raw = synthetic_regression(100, bt, 1.0, rng);
  raw.X.col(1) = raw.X.col(1) * 7.0 + Vector::Constant(100, 3.0);
  const RegressionData s = standardize(raw);
  CHECK(s.X.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  for (Index j = 0; j < 3; ++j) CHECK(s.X.col(j).squaredNorm() / 99.0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.y.mean()) < 1e-12);
}

TEST_CASE("bridge posterior: slack and tight radii") {
  Rng rng(73, 0);
  Vector bt(6);
  bt << 2, -1, 0, 0, 1.5, 0;
  const RegressionData data = synthetic_regression(150, bt, 1.5, rng);
  const RegressionData sd = standardize(data);
  const Vector ols = ols_fit(sd.X, sd.y);

  BridgeSettings st;
  st.samples = 4000;
  st.burnin = 1000;
  st.prior_variance = 1e6;
  for (double q : {1.0, 0.8, 1.5}) {
    const double base = qnorm(ols, q);
    const BridgePath path = bridge_fit(data, q, {0.01 * base, 2.0 * base}, st, rng);
    const auto& tight = path.points[0];
    const auto& slack = path.points[1];
    CHECK(tight.posterior_mean.lpNorm<1>() <= 0.01 * ols.lpNorm<1>() * 1.0001 + 1e-12);
    CHECK(tight.max_qnorm <= tight.r * (1 + 1e-10));
    CHECK(slack.max_qnorm <= slack.r * (1 + 1e-10));
    for (Index i = 0; i < ols.size(); ++i) CHECK(std::abs(slack.posterior_mean[i] - ols[i]) <= 2 * slack.posterior_sd[i]);
    CHECK(slack.shrinkage == doctest::Approx(1.0).epsilon(0.05));
    CHECK(slack.acceptance > 0.5);
  }
}

TEST_CASE("bridge radii are validated") {
  Rng rng(74, 0);
  const RegressionData data = synthetic_regression(30, Vector::Ones(2), 1.0, rng);
  const BridgeSettings st;
  CHECK_THROWS_AS(bridge_fit(data, 1.0, {0.5, -1.0}, st, rng), PreconditionError);
  CHECK_THROWS_AS(bridge_fit(data, 1.0, {0.0}, st, rng), PreconditionError);
  CHECK_THROWS_AS(bridge_fit(data, 1.0, {2.0, 1.0}, st, rng), PreconditionError);
  CHECK_THROWS_AS(bridge_fit(data, 0.0, {1.0}, st, rng), PreconditionError);
}

TEST_CASE("two-coefficient bridge posterior matches grid quadrature") {
  Rng rng(75, 0);
  Vector bt(2);
  bt << 1.0, 0.4;
  const RegressionData sd = standardize(synthetic_regression(30, bt, 1.0, rng));
  const Vector ols = ols_fit(sd.X, sd.y);
  BridgeSettings st;
  st.samples = 40000;
  st.burnin = 2000;
  st.sample_noise = false;
  st.noise_variance = 1.0;
  for (double q : {1.0, 0.8}) {
    const double r = 0.6 * qnorm(ols, q);
    const TargetModel post = bridge_posterior(BridgeModel{sd.X, sd.y, q, r, 1.0, st.prior_variance});
    const int n = 400;
    const double h = 2.0 * r / n;
    Vector acc = Vector::Zero(2);
    double mass = 0.0;
    double ref = post.log_density(Vector::Zero(2));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Vector b(2);
        b << -r + (i + 0.5) * h, -r + (j + 0.5) * h;
        if (qnorm(b, q) > r) continue;
        const double w = std::exp(post.log_density(b) - ref);
        acc += w * b;
        mass += w;
      }
    }
    const Vector truth = acc / mass;
    const BridgePathPoint pt = bridge_posterior_sample(sd, q, r, st, rng);
    CHECK((pt.posterior_mean - truth).cwiseAbs().maxCoeff() < 0.01);
    CHECK(pt.max_qnorm <= r * (1 + 1e-10));
  }
}

TEST_CASE("cosine basis is orthonormal") {
  const Index n = 4096;
  const Matrix grid = unit_grid(n);
  const CosineBasis b1(1, 12);
  const Matrix G = b1.design(grid);
  CHECK((G.transpose() * G / static_cast<double>(n) - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-6);

  const Index m = 256;
  Matrix sq(m * m, 2);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) sq.row(i * m + j) << (i + 0.5) / m, (j + 0.5) / m;
  const CosineBasis b2(2, 15);
  const Matrix G2 = b2.design(sq);
  CHECK((G2.transpose() * G2 / static_cast<double>(m * m) - Matrix::Identity(15, 15)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(b2.frequencies()[0] == std::pair<int, int>{0, 0});
  CHECK_THROWS_AS(CosineBasis(3, 4), PreconditionError);
}

TEST_CASE("density estimation") {
  Rng rng(76, 0);
  const Matrix data = mixture_data(1000, rng);
  const Matrix grid = unit_grid(512);

  SUBCASE("one basis function") {
    const DensityFit fit = density_fit(data, 1, 1.2, DensitySettings{}, rng);
    CHECK((fit.draws.array().abs() == 1.0).all());
    const Vector d = eval_density(fit.draws, fit.model.basis, grid);
    CHECK((d.array() - 1.0).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("mixture recovery") {
    const DensityFit fit = density_fit(data, 20, 1.2, DensitySettings{}, rng);
    for (Index i = 0; i < fit.draws.rows(); ++i) CHECK(std::abs(fit.draws.row(i).squaredNorm() - 1.0) <= 1e-12);
    const Vector d = eval_density(fit.draws, fit.model.basis, grid);
    const auto mix = reference_mixture();
    double l1 = 0.0;
    for (Index i = 0; i < grid.rows(); ++i) l1 += std::abs(d[i] - mix.pdf(grid(i, 0))) / 512.0;
    CHECK(l1 < 0.15);
    CHECK(d.minCoeff() >= 0.0);
    CHECK(d.mean() >= 0.9);
    CHECK(d.mean() <= 1.1);
  }
  SUBCASE("single draw") {
    Vector q = rng.normal_vector(6).normalized();
    const CosineBasis b(1, 6);
    const Vector d = eval_density(q.transpose(), b, grid);
    for (Index i = 0; i < grid.rows(); ++i)
      CHECK(d[i] == doctest::Approx(std::pow(b.evaluate(grid.row(i).transpose()).dot(q), 2)).epsilon(1e-13));
  }
  SUBCASE("contracts") {
    Matrix bad = data;
    bad(3, 0) = 1.5;
    CHECK_THROWS_AS(density_fit(bad, 5, 1.2, DensitySettings{}, rng), PreconditionError);
    CHECK_THROWS_AS(density_fit(data, 0, 1.2, DensitySettings{}, rng), PreconditionError);
    CHECK_THROWS_AS(eval_density(Matrix::Ones(2, 3), CosineBasis(1, 4), grid), DimensionError);
  }
}

TEST_CASE("density potential gradient") {
  Rng rng(77, 0);
  const DensityModel m = make_density_model(mixture_data(50, rng), 6, 1.2);
  const DensityPotential pot(m);
  for (int k = 0; k < 20; ++k) {
    const Vector q = rng.normal_vector(6).normalized();
    const Vector g = pot.gradient(q);
    for (Index i = 0; i < 6; ++i) {
      Vector a = q, b = q;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      const double fd = (pot.value(a) - pot.value(b)) / 2e-6;
      CHECK(fd == doctest::Approx(g[i]).epsilon(1e-5).scale(std::abs(g[i]) + 1.0));
    }
  }
}

TEST_CASE("mixture reference density") {
  const auto mix = reference_mixture();
  double mass = 0.0;
  for (int i = 0; i < 100000; ++i) mass += mix.pdf((i + 0.5) / 100000.0) / 100000.0;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(mix.pdf(-0.1) == 0.0);
  Rng rng(78, 0);
  for (int i = 0; i < 1000; ++i) {
    const double x = mix.sample(rng);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("model registry") {
  for (const auto& name : model_names()) {
    const Problem p = make_problem(name, name == "tmg" ? 2 : 3);
    CHECK(p.name == name);
    CHECK_FALSE(p.samplers.empty());
    for (const auto& s : p.samplers) CHECK(p.defaults.count(s) == 1);
    REQUIRE(p.constraints);
    CHECK(std::isfinite(p.model.log_density(p.initial)));
    Rng rng(79, 0);
    for (const auto& s : p.samplers) {
      const ChainResult c = run_problem_chain(p, s, p.defaults.at(s), 200, 50, rng);
      CHECK(c.draws.rows() == 200);
      CHECK(c.draws.cols() == p.dim);
      for (Index i = 0; i < c.draws.rows(); ++i) CHECK(is_feasible(*p.constraints, c.draws.row(i).transpose(), 1e-8));
    }
  }
  try {
    make_problem("lasso", 3);
    FAIL("expected an error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("uniform-ball") != std::string::npos);
  }
  const Problem ball = make_problem("uniform-ball", 3);
  Rng rng(80, 0);
  try {
    run_problem_chain(ball, "exact", ball.defaults.at("sph"), 10, 0, rng);
    FAIL("expected an error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("sph") != std::string::npos);
  }
}
