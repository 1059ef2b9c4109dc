#pragma once

#include "consamp/model.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace consamp {

/// Draws and bookkeeping from one chain.
struct ChainResult {
  /// Retained draws, one row per iteration after burn-in.
  Matrix draws;
  long iterations = 0;  // including burn-in
  long accepted = 0;
  double accept_prob_sum = 0.0;
  long bounces = 0;
  /// Wall-clock seconds of the sampling loop (burn-in included).
  double seconds = 0.0;
  bool reports_bounces = false;
};

struct EssResult {
  double ess = 1.0;
  bool degenerate = false;
};

/// Effective sample size N / (1 + 2 sum rho_k) with Geyer's initial
/// monotone positive sequence truncation, clipped to [1, N].
EssResult effective_sample_size(const Eigen::Ref<const Vector>& chain);

struct MomentSummary {
  Vector mean;
  Vector mean_sd;
  Matrix covariance;
  Matrix covariance_sd;
  int replicates = 0;
};

/// Per-replicate sample mean and covariance, then across-replicate mean and
/// standard deviation. Needs at least two replicates.
MomentSummary summarize(const std::vector<Matrix>& replicates);

struct RunReport {
  double acceptance_probability = 0.0;
  double seconds_per_iteration = 0.0;
  double total_seconds = 0.0;
  double ess_min = 0.0;
  double ess_med = 0.0;
  double ess_max = 0.0;
  double min_ess_per_second = 0.0;
  long draws = 0;
  std::optional<MomentSummary> moment_estimates;
  std::optional<double> bounce_stats;
  std::optional<double> speedup;
};

/// Report for a single chain.
RunReport report(const ChainResult& chain);
/// Report pooled over replicate chains: ESS per dimension and timing are
/// averaged across replicates; moments carry across-replicate spreads when
/// there are at least two.
RunReport report(const std::vector<ChainResult>& replicates);

/// Fills RunReport::speedup as min_ess_per_second relative to `baseline`.
void set_speedup(RunReport& r, const RunReport& baseline);

nlohmann::json to_json(const MomentSummary& m);
nlohmann::json to_json(const RunReport& r);

}  // namespace consamp
