#pragma once

// Truncated multivariate Gaussian benchmark: N(0, Sigma) with
// Sigma_ij = 1 / (1 + |i - j|) restricted to the box 0 <= beta_i <= u_i.

#include "consamp/diagnostics.hpp"
#include "consamp/exact_tmg.hpp"
#include "consamp/model.hpp"
#include "consamp/spherical.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace consamp {

struct TmgProblem {
  Vector lower;
  Vector upper;
  TmgSpec spec;
  /// Gaussian restricted to the box (-inf outside).
  TargetModel model;
  ConstraintSet constraints;
};

/// dim = 2: u = (5, 1). Otherwise u = (5, 0.5, ..., 0.5). Lower bounds 0.
TmgProblem tmg_preset(Index dim);
TmgProblem make_tmg_problem(Vector mean, Matrix covariance, Vector lower, Vector upper);

/// Sampler names accepted by the benchmark: rwm, hmc, wall, exact, sph.
const std::vector<std::string>& tmg_sampler_names();

struct SamplerSettings {
  double step_size = 0.1;
  int steps = 10;
  double jitter = 0.1;
  double proposal_scale = 0.1;
  double travel_time = kDefaultTravelTime;
};

/// Tuned defaults per sampler and dimension.
SamplerSettings default_settings(const std::string& sampler, Index dim);

/// Deterministic interior starting point spread over the box by a golden-ratio sequence.
Vector tmg_initial_point(const TmgProblem& p);

ChainResult run_tmg_chain(const TmgProblem& p, const std::string& sampler, const SamplerSettings& settings,
                          long samples, long burnin, Rng& rng);

struct BenchmarkOptions {
  long samples = 20000;
  long burnin = 2000;
  int replicates = 1;
  std::uint64_t seed = 42;
  /// Overrides applied on top of default_settings when set (> 0).
  double step_size = 0.0;
  int steps = 0;
  double proposal_scale = 0.0;
  double travel_time = 0.0;
};

struct BenchmarkEntry {
  std::string sampler;
  SamplerSettings settings;
  RunReport report;
  std::vector<ChainResult> chains;
};

/// Runs every requested sampler for `replicates` independent chains
/// (concurrently), then reports per sampler. Speedups are relative to rwm
/// when it is among the samplers.
std::vector<BenchmarkEntry> tmg_benchmark(const TmgProblem& p, const std::vector<std::string>& samplers,
                                          const BenchmarkOptions& opts);

}  // namespace consamp
