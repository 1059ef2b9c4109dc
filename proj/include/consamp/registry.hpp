#pragma once

// Built-in models addressable by name from the command line.

#include "consamp/applications/tmg.hpp"
#include "consamp/diagnostics.hpp"
#include "consamp/exact_tmg.hpp"
#include "consamp/model.hpp"
#include "consamp/spherical.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace consamp {

struct Problem {
  std::string name;
  Index dim = 0;
  /// Target in the coordinates samples are reported in (-inf when infeasible).
  TargetModel model;
  /// Constraint every emitted sample must satisfy.
  std::optional<ConstraintSet> constraints;
  /// Present for truncated Gaussians (enables the exact sampler).
  std::optional<TmgProblem> tmg;
  /// Present for targets that live natively on a sphere.
  std::shared_ptr<const SpherePotential> sphere;
  Vector initial;
  std::vector<std::string> samplers;
  /// Tuned settings per entry of `samplers`.
  std::map<std::string, SamplerSettings> defaults;
};

/// "tmg", "bridge", "density", "uniform-ball".
const std::vector<std::string>& model_names();

/// Builds the named model at the given dimension. Synthetic data for
/// "bridge" and "density" is generated from a fixed internal seed.
Problem make_problem(const std::string& name, Index dim);

/// Runs one chain of `sampler` on `p`; rows of the result are in the
/// problem's reporting coordinates.
ChainResult run_problem_chain(const Problem& p, const std::string& sampler, const SamplerSettings& settings,
                              long samples, long burnin, Rng& rng);

}  // namespace consamp
