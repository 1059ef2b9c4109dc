#include "consamp/diagnostics.hpp"

#include "consamp/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace consamp {

namespace {

// Biased autocorrelation rho_k, k = 0..n-1, via zero-padded FFT.
std::vector<double> autocorrelation(const Vector& centered) {
  const Index n = centered.size();
  Index m = 1;
  while (m < 2 * n) m <<= 1;
  std::vector<double> padded(static_cast<std::size_t>(m), 0.0);
  for (Index i = 0; i < n; ++i) padded[static_cast<std::size_t>(i)] = centered[i];
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, padded);
  for (auto& f : freq) f = std::norm(f);
  std::vector<double> acov;
  fft.inv(acov, freq);
  std::vector<double> rho(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) rho[static_cast<std::size_t>(k)] = acov[static_cast<std::size_t>(k)] / acov[0];
  return rho;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Matrix covariance(const Matrix& draws) {
  const Matrix centered = draws.rowwise() - draws.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(draws.rows() - 1);
}

}  // namespace

EssResult effective_sample_size(const Eigen::Ref<const Vector>& chain) {
  const Index n = chain.size();
  if (n < 10) throw PreconditionError("ESS needs at least 10 draws");
  const Vector centered = chain.array() - chain.mean();
  const double spread = centered.cwiseAbs().maxCoeff();
  if (spread <= 1e-14 * std::max(1.0, chain.cwiseAbs().maxCoeff())) return {1.0, true};
  const auto rho = autocorrelation(centered);
  // Gamma_m = rho_{2m} + rho_{2m+1}; keep the initial positive, monotone part.
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (Index m = 0; 2 * m + 1 < n; ++m) {
    double gamma = rho[static_cast<std::size_t>(2 * m)] + rho[static_cast<std::size_t>(2 * m + 1)];
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, prev);
    sum += gamma;
    prev = gamma;
  }
  const double tau = -1.0 + 2.0 * sum;
  const double nn = static_cast<double>(n);
  const double ess = tau > 0.0 ? nn / tau : nn;
  return {std::clamp(ess, 1.0, nn), false};
}

MomentSummary summarize(const std::vector<Matrix>& replicates) {
  if (replicates.size() < 2) throw PreconditionError("summarize needs at least two replicates");
  const Index d = replicates.front().cols();
  const double k = static_cast<double>(replicates.size());
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  for (const auto& r : replicates) {
    if (r.cols() != d || r.rows() < 2) throw DimensionError("replicates must share dimension and have >= 2 rows");
    means.push_back(r.colwise().mean().transpose());
    covs.push_back(covariance(r));
  }
  MomentSummary s;
  s.replicates = static_cast<int>(replicates.size());
  // Accumulated relative to the first replicate.
  Vector dm = Vector::Zero(d);
  Matrix dc = Matrix::Zero(d, d);
  for (std::size_t i = 1; i < means.size(); ++i) {
    dm += means[i] - means[0];
    dc += covs[i] - covs[0];
  }
  s.mean = means[0] + dm / k;
  s.covariance = covs[0] + dc / k;
  s.mean_sd = Vector::Zero(d);
  s.covariance_sd = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < means.size(); ++i) {
    s.mean_sd += (means[i] - s.mean).cwiseAbs2() / (k - 1);
    s.covariance_sd += (covs[i] - s.covariance).cwiseAbs2() / (k - 1);
  }
  s.mean_sd = s.mean_sd.cwiseSqrt();
  s.covariance_sd = s.covariance_sd.cwiseSqrt();
  return s;
}

RunReport report(const ChainResult& chain) { return report(std::vector<ChainResult>{chain}); }

RunReport report(const std::vector<ChainResult>& replicates) {
  if (replicates.empty()) throw PreconditionError("report needs at least one chain");
  const Index d = replicates.front().draws.cols();
  const double k = static_cast<double>(replicates.size());
  RunReport r;
  Vector ess = Vector::Zero(d);
  long iterations = 0;
  long bounces = 0;
  double prob_sum = 0.0;
  bool any_bounces = false;
  for (const auto& c : replicates) {
    if (c.draws.cols() != d) throw DimensionError("replicate chains differ in dimension");
    if (!(c.seconds > 0.0)) throw PreconditionError("chain wall-clock time must be positive");
    for (Index j = 0; j < d; ++j) ess[j] += effective_sample_size(c.draws.col(j)).ess / k;
    iterations += c.iterations;
    bounces += c.bounces;
    prob_sum += c.accept_prob_sum;
    r.total_seconds += c.seconds / k;
    any_bounces = any_bounces || c.reports_bounces;
  }
  std::vector<double> e(ess.data(), ess.data() + d);
  r.ess_min = *std::min_element(e.begin(), e.end());
  r.ess_max = *std::max_element(e.begin(), e.end());
  r.ess_med = median(e);
  r.draws = static_cast<long>(replicates.front().draws.rows());
  r.acceptance_probability = prob_sum / static_cast<double>(iterations);
  r.seconds_per_iteration = r.total_seconds * k / static_cast<double>(iterations);
  r.min_ess_per_second = r.ess_min / r.total_seconds;
  if (any_bounces) r.bounce_stats = static_cast<double>(bounces) / static_cast<double>(iterations);
  if (replicates.size() >= 2) {
    std::vector<Matrix> draws;
    for (const auto& c : replicates) draws.push_back(c.draws);
    r.moment_estimates = summarize(draws);
  } else {
    MomentSummary m;
    const Matrix& x = replicates.front().draws;
    m.mean = x.colwise().mean().transpose();
    m.covariance = covariance(x);
    m.mean_sd = Vector::Zero(d);
    m.covariance_sd = Matrix::Zero(d, d);
    m.replicates = 1;
    r.moment_estimates = m;
  }
  return r;
}

void set_speedup(RunReport& r, const RunReport& baseline) {
  r.speedup = r.min_ess_per_second / baseline.min_ess_per_second;
}

namespace {

nlohmann::json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vec(m.row(i).transpose()));
  return rows;
}

}  // namespace

nlohmann::json to_json(const MomentSummary& m) {
  return {{"mean", vec(m.mean)},
          {"mean_sd", vec(m.mean_sd)},
          {"covariance", mat(m.covariance)},
          {"covariance_sd", mat(m.covariance_sd)},
          {"replicates", m.replicates}};
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j = {{"acceptance_probability", r.acceptance_probability},
                      {"seconds_per_iteration", r.seconds_per_iteration},
                      {"total_seconds", r.total_seconds},
                      {"ess_min", r.ess_min},
                      {"ess_med", r.ess_med},
                      {"ess_max", r.ess_max},
                      {"min_ess_per_second", r.min_ess_per_second},
                      {"draws", r.draws}};
  j["moment_estimates"] = r.moment_estimates ? to_json(*r.moment_estimates) : nlohmann::json(nullptr);
  j["bounce_stats"] = r.bounce_stats ? nlohmann::json(*r.bounce_stats) : nlohmann::json(nullptr);
  if (r.speedup) j["speedup"] = *r.speedup;
  return j;
}

}  // namespace consamp
