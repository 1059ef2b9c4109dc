#include "consamp/registry.hpp"

#include "consamp/applications/bridge.hpp"
#include "consamp/applications/density.hpp"
#include "consamp/chain.hpp"
#include "consamp/error.hpp"
#include "consamp/rattle.hpp"
#include "consamp/wall_hmc.hpp"

#include <algorithm>

namespace consamp {

namespace {

constexpr std::uint64_t kDataSeed = 20140101;

SamplerSettings settings(double step_size, int steps, double proposal_scale = 0.1) {
  SamplerSettings s;
  s.step_size = step_size;
  s.steps = steps;
  s.proposal_scale = proposal_scale;
  return s;
}

Problem uniform_ball(Index dim) {
  Problem p;
  p.name = "uniform-ball";
  p.dim = dim;
  p.constraints = ConstraintSet(QNormBall{dim, 2.0, 1.0});
  p.model = restrict_to(flat_model(dim), *p.constraints);
  p.initial = Vector::Zero(dim);
  p.samplers = {"rwm", "hmc", "wall", "sph"};
  p.defaults = {{"rwm", settings(0.1, 10, 0.5)}, {"hmc", settings(0.2, 10)}, {"wall", settings(0.2, 10)},
                {"sph", settings(0.2, 10)}};
  return p;
}

Problem bridge(Index dim) {
  Rng rng(kDataSeed, 1);
  Vector beta = Vector::Zero(dim);
  for (Index i = 0; i < dim; ++i) beta[i] = (i % 3 == 0) ? 3.0 / (1.0 + static_cast<double>(i)) : 0.0;
  const RegressionData data = standardize(synthetic_regression(200, beta, 1.0, rng));
  const Vector ols = ols_fit(data.X, data.y);
  const double r = 0.5 * ols.lpNorm<1>();
  BridgeModel bm{data.X, data.y, 1.0, r, 1.0, 100.0};
  Problem p;
  p.name = "bridge";
  p.dim = dim;
  p.constraints = ConstraintSet(QNormBall{dim, 1.0, r});
  p.model = restrict_to(bridge_posterior(bm), *p.constraints);
  p.initial = ols * (0.25 * r / ols.lpNorm<1>());
  p.samplers = {"rwm", "hmc", "wall", "sph"};
  p.defaults = {{"rwm", settings(0.1, 10, 0.02)},
                {"hmc", settings(0.02, 20)},
                {"wall", settings(0.02, 20)},
                {"sph", settings(0.3 * ball_scale(data, 1.0, r), 20)}};
  return p;
}

Problem density(Index dim) {
  Rng rng(kDataSeed, 2);
  const auto mix = reference_mixture();
  Matrix data(1000, 1);
  for (Index i = 0; i < data.rows(); ++i) data(i, 0) = mix.sample(rng);
  auto pot = std::make_shared<DensityPotential>(make_density_model(data, static_cast<int>(dim), 1.2));
  Problem p;
  p.name = "density";
  p.dim = dim;
  p.constraints = ConstraintSet(EqualityManifold{
      dim, [](const Vector& q) -> Vector { return Vector::Constant(1, q.squaredNorm() - 1.0); },
      [](const Vector& q) -> Matrix { return 2.0 * q.transpose(); }});
  p.model.dim = dim;
  p.model.log_density = [pot](const Vector& q) { return -pot->value(q); };
  p.model.grad_log_density = [pot](const Vector& q) -> Vector { return -pot->gradient(q); };
  p.sphere = pot;
  p.initial = Vector::Zero(dim);
  p.initial[0] = 1.0;
  p.samplers = {"sph", "chmc"};
  const DensitySettings ds;
  p.defaults = {{"sph", settings(ds.step_size, ds.steps)}, {"chmc", settings(ds.step_size, ds.steps)}};
  return p;
}

}  // namespace

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names{"tmg", "bridge", "density", "uniform-ball"};
  return names;
}

Problem make_problem(const std::string& name, Index dim) {
  if (dim < 1) throw PreconditionError("model dimension must be >= 1");
  if (name == "tmg") {
    Problem p;
    p.name = name;
    p.dim = dim;
    p.tmg = tmg_preset(dim);
    p.model = p.tmg->model;
    p.constraints = p.tmg->constraints;
    p.initial = tmg_initial_point(*p.tmg);
    p.samplers = tmg_sampler_names();
    for (const auto& s : p.samplers) p.defaults[s] = default_settings(s, dim);
    return p;
  }
  if (name == "uniform-ball") return uniform_ball(dim);
  if (name == "bridge") return bridge(dim);
  if (name == "density") {
    if (dim < 2) throw PreconditionError("density model needs dim (basis size) >= 2");
    return density(dim);
  }
  std::string list;
  for (const auto& n : model_names()) list += (list.empty() ? "" : ", ") + n;
  throw PreconditionError("unknown model '" + name + "'; valid models: " + list);
}

ChainResult run_problem_chain(const Problem& p, const std::string& sampler, const SamplerSettings& s, long samples,
                              long burnin, Rng& rng) {
  if (std::find(p.samplers.begin(), p.samplers.end(), sampler) == p.samplers.end()) {
    std::string list;
    for (const auto& n : p.samplers) list += (list.empty() ? "" : ", ") + n;
    throw PreconditionError("sampler '" + sampler + "' is not available for model '" + p.name +
                            "'; valid samplers: " + list);
  }
  if (p.tmg) return run_tmg_chain(*p.tmg, sampler, s, samples, burnin, rng);
  const LeapfrogConfig cfg{s.step_size, s.steps, s.jitter};
  const ConstraintSet* cs = p.constraints ? &*p.constraints : nullptr;
  if (sampler == "rwm") {
    return run_chain([&](const Vector& x, Rng& r) { return rwm_step(p.model, cs, x, s.proposal_scale, r); },
                     p.initial, samples, burnin, rng);
  }
  if (sampler == "hmc") {
    return run_chain([&](const Vector& x, Rng& r) { return hmc_step(p.model, cs, x, cfg, r); }, p.initial, samples,
                     burnin, rng);
  }
  if (sampler == "wall") {
    auto c = run_chain([&](const Vector& x, Rng& r) { return wall_hmc_step(p.model, *cs, x, cfg, r); }, p.initial,
                       samples, burnin, rng);
    c.reports_bounces = true;
    return c;
  }
  if (sampler == "chmc") {
    const auto& manifold = std::get<EqualityManifold>(cs->variant());
    return run_chain([&](const Vector& x, Rng& r) { return chmc_step(p.model, manifold, x, cfg, r); }, p.initial,
                     samples, burnin, rng);
  }
  // sph
  if (p.sphere) {
    return run_chain([&](const Vector& x, Rng& r) { return sph_hmc_step(*p.sphere, x, cfg, r); }, p.initial, samples,
                     burnin, rng);
  }
  const EffectivePotential pot(p.model, ball_chain_for(*cs));
  return run_chain([&](const Vector& x, Rng& r) { return sph_hmc_step(pot, x, cfg, r); }, pot.from_source(p.initial),
                   samples, burnin, rng, [&](const Vector& x) { return pot.to_source(x); });
}

}  // namespace consamp
