#include "consamp/applications/tmg.hpp"

#include "consamp/chain.hpp"
#include "consamp/parallel.hpp"
#include "consamp/error.hpp"
#include "consamp/wall_hmc.hpp"

#include <algorithm>
#include <cmath>

namespace consamp {

TmgProblem make_tmg_problem(Vector mean, Matrix covariance, Vector lower, Vector upper) {
  ConstraintSet box(Box{lower, upper});
  TmgSpec spec{mean, covariance, box_walls(lower, upper)};
  TargetModel model = restrict_to(gaussian_model(mean, covariance), box);
  return TmgProblem{std::move(lower), std::move(upper), std::move(spec), std::move(model), std::move(box)};
}

TmgProblem tmg_preset(Index dim) {
  if (dim < 2) throw PreconditionError("truncated Gaussian preset needs dim >= 2");
  Matrix cov(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) cov(i, j) = 1.0 / (1.0 + static_cast<double>(std::abs(i - j)));
  }
  Vector upper = Vector::Constant(dim, dim == 2 ? 1.0 : 0.5);
  upper[0] = 5.0;
  return make_tmg_problem(Vector::Zero(dim), cov, Vector::Zero(dim), upper);
}

const std::vector<std::string>& tmg_sampler_names() {
  static const std::vector<std::string> names{"rwm", "hmc", "wall", "exact", "sph"};
  return names;
}

SamplerSettings default_settings(const std::string& sampler, Index dim) {
  SamplerSettings s;
  const bool small = dim <= 2;
  const bool large = dim >= 50;
  if (sampler == "rwm") {
    s.proposal_scale = small ? 0.6 : (large ? 0.01 : 0.1);
  } else if (sampler == "hmc") {
    s.step_size = small ? 0.2 : (large ? 0.01 : 0.05);
    s.steps = 10;
  } else if (sampler == "wall") {
    s.step_size = small ? 0.3 : (large ? 0.1 : 0.4);
    s.steps = small ? 5 : (large ? 10 : 2);
  } else if (sampler == "exact") {
    s.travel_time = kDefaultTravelTime;
  } else if (sampler == "sph") {
    s.step_size = small ? 0.1 : (large ? 0.0006 : 0.03);
    s.steps = small ? 10 : (large ? 200 : 20);
  } else {
    throw PreconditionError("unknown sampler '" + sampler + "'");
  }
  return s;
}

Vector tmg_initial_point(const TmgProblem& p) {
  const Index d = p.lower.size();
  Vector frac(d);
  for (Index i = 0; i < d; ++i) {
    frac[i] = 0.05 + 0.9 * std::fmod(0.5 + 0.6180339887498949 * static_cast<double>(i), 1.0);
  }
  return p.lower + frac.cwiseProduct(p.upper - p.lower);
}

ChainResult run_tmg_chain(const TmgProblem& p, const std::string& sampler, const SamplerSettings& s,
                          long samples, long burnin, Rng& rng) {
  const Vector init = tmg_initial_point(p);
  LeapfrogConfig cfg{s.step_size, s.steps, s.jitter};
  if (sampler == "rwm") {
    return run_chain([&](const Vector& x, Rng& r) { return rwm_step(p.model, &p.constraints, x, s.proposal_scale, r); },
                     init, samples, burnin, rng);
  }
  if (sampler == "hmc") {
    return run_chain([&](const Vector& x, Rng& r) { return hmc_step(p.model, &p.constraints, x, cfg, r); }, init,
                     samples, burnin, rng);
  }
  if (sampler == "wall") {
    auto c = run_chain([&](const Vector& x, Rng& r) { return wall_hmc_step(p.model, p.constraints, x, cfg, r); },
                       init, samples, burnin, rng);
    c.reports_bounces = true;
    return c;
  }
  if (sampler == "exact") {
    const WhitenedTmg tmg(p.spec);
    auto c = run_chain(
        [&](const Vector& x, Rng& r) {
          auto e = exact_tmg_step(tmg, x, s.travel_time, r);
          return StepResult{std::move(e.position), true, 1.0, e.bounces};
        },
        init, samples, burnin, rng);
    c.reports_bounces = true;
    return c;
  }
  if (sampler == "sph") {
    const EffectivePotential pot(p.model, ball_chain_for(p.constraints));
    return run_chain([&](const Vector& x, Rng& r) { return sph_hmc_step(pot, x, cfg, r); }, pot.from_source(init),
                     samples, burnin, rng, [&](const Vector& x) { return pot.to_source(x); });
  }
  throw PreconditionError("unknown sampler '" + sampler + "'");
}

namespace {

std::uint64_t sampler_stream(const std::string& name) {
  const auto& names = tmg_sampler_names();
  return static_cast<std::uint64_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

}  // namespace

std::vector<BenchmarkEntry> tmg_benchmark(const TmgProblem& p, const std::vector<std::string>& samplers,
                                          const BenchmarkOptions& opts) {
  if (opts.samples < 10 || opts.burnin < 0 || opts.replicates < 1) {
    throw PreconditionError("benchmark needs samples >= 10, burnin >= 0, replicates >= 1");
  }
  const auto& valid = tmg_sampler_names();
  for (const auto& s : samplers) {
    if (std::find(valid.begin(), valid.end(), s) == valid.end()) {
      std::string list;
      for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
      throw PreconditionError("unknown sampler '" + s + "'; valid samplers: " + list);
    }
  }
  std::vector<BenchmarkEntry> out;
  for (const auto& name : samplers) {
    BenchmarkEntry e;
    e.sampler = name;
    e.settings = default_settings(name, p.lower.size());
    if (opts.step_size > 0) e.settings.step_size = opts.step_size;
    if (opts.steps > 0) e.settings.steps = opts.steps;
    if (opts.proposal_scale > 0) e.settings.proposal_scale = opts.proposal_scale;
    if (opts.travel_time > 0) e.settings.travel_time = opts.travel_time;
    e.chains.resize(static_cast<std::size_t>(opts.replicates));
    parallel_for(opts.replicates, [&](int r) {
      Rng rng(opts.seed, sampler_stream(name) * 100000 + static_cast<std::uint64_t>(r));
      e.chains[static_cast<std::size_t>(r)] = run_tmg_chain(p, name, e.settings, opts.samples, opts.burnin, rng);
    });
    e.report = report(e.chains);
    out.push_back(std::move(e));
  }
  const auto rwm = std::find_if(out.begin(), out.end(), [](const auto& e) { return e.sampler == "rwm"; });
  if (rwm != out.end()) {
    const RunReport base = rwm->report;
    for (auto& e : out) set_speedup(e.report, base);
  }
  return out;
}

}  // namespace consamp
