#include "consamp/applications/density.hpp"

#include "consamp/chain.hpp"
#include "consamp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace consamp {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kPi = std::numbers::pi;

double cosine(int k, double x) { return k == 0 ? 1.0 : kSqrt2 * std::cos(k * kPi * x); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

}  // namespace

CosineBasis::CosineBasis(int input_dim, int size) : input_dim_(input_dim) {
  if (input_dim != 1 && input_dim != 2) throw PreconditionError("cosine basis supports 1 or 2 input dimensions");
  if (size < 1) throw PreconditionError("basis size must be >= 1");
  if (input_dim == 1) {
    for (int k = 0; k < size; ++k) freqs_.emplace_back(k, 0);
    return;
  }
  for (int total = 0; static_cast<int>(freqs_.size()) < size; ++total) {
    for (int a = 0; a <= total && static_cast<int>(freqs_.size()) < size; ++a) freqs_.emplace_back(a, total - a);
  }
}

Vector CosineBasis::evaluate(const Vector& x) const {
  if (x.size() != input_dim_) throw DimensionError("basis point has wrong dimension");
  Vector out(size());
  for (int l = 0; l < size(); ++l) {
    const auto [a, b] = freqs_[static_cast<std::size_t>(l)];
    out[l] = input_dim_ == 1 ? cosine(a, x[0]) : cosine(a, x[0]) * cosine(b, x[1]);
  }
  return out;
}

Matrix CosineBasis::design(const Matrix& points) const {
  Matrix out(points.rows(), size());
  for (Index i = 0; i < points.rows(); ++i) out.row(i) = evaluate(points.row(i).transpose()).transpose();
  return out;
}

DensityModel make_density_model(const Matrix& data, int truncation, double decay_rate) {
  if (data.rows() < 1) throw PreconditionError("density estimation needs data");
  if (truncation < 1) throw PreconditionError("truncation L must be >= 1");
  if ((data.array() < 0.0).any() || (data.array() > 1.0).any()) {
    throw PreconditionError("density data must lie in the unit interval/square");
  }
  CosineBasis basis(static_cast<int>(data.cols()), truncation);
  Vector lambda(truncation);
  for (int l = 0; l < truncation; ++l) lambda[l] = std::pow(2.0 + l, -decay_rate);
  return DensityModel{std::move(basis), std::move(lambda), data};
}

DensityPotential::DensityPotential(const DensityModel& model)
    : design_(model.basis.design(model.data)),
      inv_var_(model.eigenvalues.array().square().inverse()),
      lambda_(model.eigenvalues) {}

double DensityPotential::value(const Vector& q) const {
  const Vector f = design_ * q;
  double log_lik = 0.0;
  for (Index n = 0; n < f.size(); ++n) log_lik += std::log(f[n] * f[n]);
  return 0.5 * q.cwiseProduct(inv_var_).dot(q) - log_lik;
}

Vector DensityPotential::gradient(const Vector& q) const {
  const Vector f = design_ * q;
  return q.cwiseProduct(inv_var_) - 2.0 * design_.transpose() * f.cwiseInverse();
}

DensityFit density_fit(const Matrix& data, int truncation, double decay_rate, const DensitySettings& settings,
                       Rng& rng) {
  DensityModel model = make_density_model(data, truncation, decay_rate);
  DensityFit fit{model, Matrix(), 0.0};
  if (truncation == 1) {
    fit.draws = Matrix::Ones(settings.samples, 1);
    fit.acceptance = 1.0;
    return fit;
  }
  const DensityPotential pot(model);
  // q = e_1 gives q(x) = 1 > 0 at every data point.
  Vector start = Vector::Zero(truncation);
  start[0] = 1.0;
  if (!std::isfinite(pot.value(start))) throw SamplerError("density initialization has zero likelihood");
  const LeapfrogConfig cfg{settings.step_size, settings.steps, settings.jitter};
  ChainResult c = run_chain([&](const Vector& x, Rng& g) { return sph_hmc_step(pot, x, cfg, g); }, start,
                            settings.samples, settings.burnin, rng);
  fit.draws = std::move(c.draws);
  fit.acceptance = c.accept_prob_sum / static_cast<double>(c.iterations);
  return fit;
}

Vector eval_density(const Matrix& draws, const CosineBasis& basis, const Matrix& grid) {
  if (draws.cols() != basis.size()) throw DimensionError("draws do not match basis size");
  const Matrix values = (basis.design(grid) * draws.transpose()).array().square();
  Vector out(grid.rows());
  std::vector<double> row(static_cast<std::size_t>(draws.rows()));
  for (Index i = 0; i < grid.rows(); ++i) {
    for (Index k = 0; k < draws.rows(); ++k) row[static_cast<std::size_t>(k)] = values(i, k);
    const auto mid = row.begin() + static_cast<std::ptrdiff_t>(row.size() / 2);
    std::nth_element(row.begin(), mid, row.end());
    double med = *mid;
    if (row.size() % 2 == 0) med = 0.5 * (med + *std::max_element(row.begin(), mid));
    out[i] = med;
  }
  return out;
}

double TruncatedGaussianMixture::pdf(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  double total = 0.0;
  double wsum = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) {
    const double mass = normal_cdf((1.0 - means[k]) / sds[k]) - normal_cdf(-means[k] / sds[k]);
    const double z = (x - means[k]) / sds[k];
    total += weights[k] * std::exp(-0.5 * z * z) / (sds[k] * std::sqrt(2.0 * kPi) * mass);
    wsum += weights[k];
  }
  return total / wsum;
}

double TruncatedGaussianMixture::sample(Rng& rng) const {
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  double u = rng.uniform() * wsum;
  std::size_t k = 0;
  while (k + 1 < weights.size() && u > weights[k]) u -= weights[k++];
  while (true) {
    const double x = means[k] + sds[k] * rng.normal();
    if (x >= 0.0 && x <= 1.0) return x;
  }
}

TruncatedGaussianMixture reference_mixture() { return {{0.25, 0.65}, {0.08, 0.12}, {0.4, 0.6}}; }

}  // namespace consamp
