#include "consamp/applications/bridge.hpp"

#include "consamp/chain.hpp"
#include "consamp/diagnostics.hpp"
#include "consamp/error.hpp"
#include "consamp/spherical.hpp"
#include "consamp/transforms.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace consamp {

RegressionData standardize(const RegressionData& data) {
  const Index n = data.X.rows();
  if (n < 2 || data.y.size() != n) throw DimensionError("regression data needs >= 2 rows and matching y");
  RegressionData out;
  out.X = data.X.rowwise() - data.X.colwise().mean();
  for (Index j = 0; j < out.X.cols(); ++j) {
    const double sd = std::sqrt(out.X.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw PreconditionError("constant predictor column cannot be standardized");
    out.X.col(j) /= sd;
  }
  out.y = data.y.array() - data.y.mean();
  return out;
}

Vector ols_fit(const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw DimensionError("X rows and y length differ");
  const Matrix gram = X.transpose() * X;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success || X.cols() > X.rows()) throw PreconditionError("X^T X is singular");
  if (llt.rcond() < 1e-12) throw PreconditionError("X^T X is singular");
  return llt.solve(X.transpose() * y);
}

void BridgeModel::validate() const {
  if (X.rows() < 1 || X.cols() < 1 || y.size() != X.rows()) throw DimensionError("bridge model needs n, D >= 1");
  if (!(q > 0.0)) throw PreconditionError("bridge model needs q > 0");
  if (!(r > 0.0)) throw PreconditionError("bridge model needs r > 0");
  if (!(noise_variance > 0.0) || !(prior_variance > 0.0)) throw PreconditionError("variances must be positive");
}

namespace {

struct Sufficient {
  Matrix xtx;
  Vector xty;
  double yty = 0.0;
};

TargetModel posterior_from(const Sufficient& s, double noise_variance, double prior_variance) {
  TargetModel m;
  m.dim = s.xty.size();
  m.log_density = [s, noise_variance, prior_variance](const Vector& b) {
    const double rss = b.dot(s.xtx * b) - 2.0 * b.dot(s.xty) + s.yty;
    return -0.5 * rss / noise_variance - 0.5 * b.squaredNorm() / prior_variance;
  };
  m.grad_log_density = [s, noise_variance, prior_variance](const Vector& b) -> Vector {
    return (s.xty - s.xtx * b) / noise_variance - b / prior_variance;
  };
  return m;
}

}  // namespace

double ball_scale(const RegressionData& data, double q, double r) {
  const Index n = data.X.rows();
  const Index D = data.X.cols();
  const Matrix gram = data.X.transpose() * data.X;
  const Eigen::LLT<Matrix> llt(gram);
  const Vector ols = ols_fit(data.X, data.y);
  const double dof = static_cast<double>(std::max<Index>(n - D, 1));
  const double s2 = std::max((data.y - data.X * ols).squaredNorm() / dof, 1e-12);
  const Vector cov_diag = llt.solve(Matrix::Identity(D, D)).diagonal();
  Vector at = ols;
  const double norm = qnorm(at, q);
  if (norm > r) at *= r / norm;
  double scale = kMaxBallScale;
  for (Index i = 0; i < D; ++i) {
    const double u = std::max(std::abs(at[i]) / r, kCoordinateClamp);
    const double dtheta = 0.5 * q * std::pow(u, 0.5 * q - 1.0) / r;
    scale = std::min(scale, dtheta * std::sqrt(s2 * cov_diag[i]));
  }
  return scale;
}

TargetModel bridge_posterior(const BridgeModel& m) {
  m.validate();
  Sufficient s{m.X.transpose() * m.X, m.X.transpose() * m.y, m.y.squaredNorm()};
  return posterior_from(s, m.noise_variance, m.prior_variance);
}

BridgePathPoint bridge_posterior_sample(const RegressionData& data, double q, double r,
                                        const BridgeSettings& settings, Rng& rng) {
  BridgeModel bm{data.X, data.y, q, r, settings.noise_variance, settings.prior_variance};
  bm.validate();
  const Index D = data.X.cols();
  const double n = static_cast<double>(data.X.rows());
  const Sufficient suff{data.X.transpose() * data.X, data.X.transpose() * data.y, data.y.squaredNorm()};
  const TransformChain chain({DomainTransform::qnorm_to_ball(q, r)});

  // Start from OLS pulled inside the ball, away from coordinate zeros.
  Vector start = ols_fit(data.X, data.y);
  const double norm = qnorm(start, q);
  if (norm > 0.5 * r) start *= 0.5 * r / norm;
  for (Index i = 0; i < D; ++i) {
    if (std::abs(start[i]) < 1e-3 * r) start[i] = (i % 2 ? -1e-3 : 1e-3) * r;
  }
  Vector x = augment(chain.forward(start));

  double noise = settings.noise_variance;
  const LeapfrogConfig cfg{settings.step_size * ball_scale(data, q, r), settings.steps, settings.jitter};
  const auto step = [&](const Vector& cur, Rng& g) {
    const EffectivePotential pot(posterior_from(suff, noise, settings.prior_variance), chain);
    StepResult res = sph_hmc_step(pot, cur, cfg, g);
    if (settings.sign_flips) {
      double u = pot.value(res.position);
      for (Index i = 0; i < D; ++i) {
        Vector flipped = res.position;
        flipped[i] = -flipped[i];
        const double uf = pot.value(flipped);
        if (std::log(g.uniform()) < u - uf) {
          res.position = std::move(flipped);
          u = uf;
        }
      }
    }
    if (settings.sample_noise) {
      const Vector beta = chain.inverse(deaugment(res.position));
      const double rss = beta.dot(suff.xtx * beta) - 2.0 * beta.dot(suff.xty) + suff.yty;
      const double shape = settings.noise_shape + 0.5 * n;
      const double scale = settings.noise_scale + 0.5 * std::max(rss, 0.0);
      noise = scale / g.gamma(shape);
    }
    return res;
  };
  ChainResult c = run_chain(step, x, settings.samples, settings.burnin, rng,
                            [&](const Vector& v) { return chain.inverse(deaugment(v)); });

  BridgePathPoint pt;
  pt.r = r;
  pt.posterior_mean = c.draws.colwise().mean().transpose();
  const Matrix centered = c.draws.rowwise() - pt.posterior_mean.transpose();
  pt.posterior_sd = (centered.colwise().squaredNorm() / static_cast<double>(c.draws.rows() - 1)).cwiseSqrt().transpose();
  pt.mc_standard_error.resize(D);
  for (Index j = 0; j < D; ++j) {
    const double ess = effective_sample_size(c.draws.col(j)).ess;
    pt.mc_standard_error[j] = pt.posterior_sd[j] / std::sqrt(ess);
  }
  pt.acceptance = c.accept_prob_sum / static_cast<double>(c.iterations);
  pt.max_qnorm = 0.0;
  for (Index i = 0; i < c.draws.rows(); ++i) pt.max_qnorm = std::max(pt.max_qnorm, qnorm(c.draws.row(i).transpose(), q));
  pt.draws = std::move(c.draws);
  return pt;
}

BridgePath bridge_fit(const RegressionData& data, double q, const std::vector<double>& r_grid,
                      const BridgeSettings& settings, Rng& rng) {
  if (!(q > 0.0)) throw PreconditionError("bridge_fit needs q > 0");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0)) throw PreconditionError("bridge_fit radii must be positive");
    if (i > 0 && !(r_grid[i] > r_grid[i - 1])) throw PreconditionError("bridge_fit radii must be increasing");
  }
  const RegressionData std_data = standardize(data);
  BridgePath path;
  path.q = q;
  path.ols = ols_fit(std_data.X, std_data.y);
  const double ols_l1 = path.ols.lpNorm<1>();
  for (double r : r_grid) {
    BridgePathPoint pt = bridge_posterior_sample(std_data, q, r, settings, rng);
    pt.shrinkage = pt.posterior_mean.lpNorm<1>() / ols_l1;
    path.points.push_back(std::move(pt));
  }
  return path;
}

int count_near_zero(const Vector& beta, const Vector& reference, double rel) {
  const double cut = rel * reference.cwiseAbs().maxCoeff();
  return static_cast<int>((beta.array().abs() < cut).count());
}

RegressionData synthetic_regression(Index n, const Vector& beta_true, double noise_sd, Rng& rng) {
  const Index D = beta_true.size();
  RegressionData data;
  data.X.resize(n, D);
  for (Index i = 0; i < n; ++i) {
    double prev = rng.normal();
    for (Index j = 0; j < D; ++j) {
      const double z = 0.5 * prev + std::sqrt(0.75) * rng.normal();
      data.X(i, j) = z;
      prev = z;
    }
  }
  data.y = data.X * beta_true + noise_sd * rng.normal_vector(n);
  return data;
}

}  // namespace consamp
