#pragma once

// Nonparametric density estimation on the unit interval or square. The
// square-root density q(x) = sum_l q_l phi_l(x) is expanded in an
// orthonormal cosine basis; sum_l q_l^2 = 1 puts the coefficients on the
// sphere S^{L-1}, which Spherical HMC samples directly.

#include "consamp/hmc.hpp"
#include "consamp/model.hpp"
#include "consamp/rng.hpp"
#include "consamp/spherical.hpp"

#include <utility>
#include <vector>

namespace consamp {

/// Cosine basis phi_1 = 1, phi_{k+1}(x) = sqrt(2) cos(k pi x) on [0, 1];
/// on [0, 1]^2 tensor products ordered by total frequency.
class CosineBasis {
 public:
  CosineBasis(int input_dim, int size);

  int input_dim() const { return input_dim_; }
  int size() const { return static_cast<int>(freqs_.size()); }
  /// Basis values at one point (length input_dim).
  Vector evaluate(const Vector& x) const;
  /// N x L matrix of basis values at the rows of `points`.
  Matrix design(const Matrix& points) const;
  const std::vector<std::pair<int, int>>& frequencies() const { return freqs_; }

 private:
  int input_dim_;
  std::vector<std::pair<int, int>> freqs_;
};

struct DensityModel {
  CosineBasis basis;
  /// Prior standard deviations lambda_l = (1 + l)^(-decay_rate).
  Vector eigenvalues;
  Matrix data;
};

DensityModel make_density_model(const Matrix& data, int truncation, double decay_rate);

/// -log posterior of the coefficients on S^{L-1}:
/// sum_l q_l^2 / (2 lambda_l^2) - sum_n log (q . phi(x_n))^2.
class DensityPotential : public SpherePotential {
 public:
  explicit DensityPotential(const DensityModel& model);

  Index sphere_dim() const override { return lambda_.size() - 1; }
  double value(const Vector& q) const override;
  Vector gradient(const Vector& q) const override;

 private:
  Matrix design_;
  Vector inv_var_;
  Vector lambda_;
};

struct DensitySettings {
  long samples = 1000;
  long burnin = 1000;
  double step_size = 0.003;
  int steps = 40;
  double jitter = 0.1;
};

struct DensityFit {
  DensityModel model;
  /// One posterior draw of q in S^{L-1} per row.
  Matrix draws;
  double acceptance = 0.0;
};

/// Samples the coefficient posterior. Data must lie in the unit domain.
DensityFit density_fit(const Matrix& data, int truncation, double decay_rate, const DensitySettings& settings,
                       Rng& rng);

/// Pointwise median over draws of (sum_l q_l phi_l(x))^2 at each grid row.
Vector eval_density(const Matrix& draws, const CosineBasis& basis, const Matrix& grid);

/// Equal-weight mixture of Gaussians truncated to [0, 1].
struct TruncatedGaussianMixture {
  std::vector<double> means;
  std::vector<double> sds;
  std::vector<double> weights;

  double pdf(double x) const;
  double sample(Rng& rng) const;
};

/// Two-component mixture used in tests and the CLI demo:
/// 0.4 N(0.25, 0.08^2) + 0.6 N(0.65, 0.12^2), truncated to [0, 1].
TruncatedGaussianMixture reference_mixture();

}  // namespace consamp
