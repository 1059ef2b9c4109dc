// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only NAME]... [--known-failure NAME]...
//
// Exit status is 0 when every criterion passes or fails only where listed
// with --known-failure.

#include "consamp/applications/bridge.hpp"
#include "consamp/applications/density.hpp"
#include "consamp/applications/tmg.hpp"
#include "consamp/chain.hpp"
#include "consamp/cli.hpp"
#include "consamp/hmc.hpp"
#include "consamp/parallel.hpp"
#include "consamp/rattle.hpp"
#include "consamp/spherical.hpp"
#include "consamp/wall_hmc.hpp"
#include "oracles.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace consamp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s << std::setprecision(prec) << x;
  return s.str();
}

const Vector kTruthMean = (Vector(2) << 0.7906, 0.4889).finished();
const Matrix kTruthCov = (Matrix(2, 2) << 0.3269, 0.0172, 0.0172, 0.08).finished();

std::vector<Matrix> tmg_replicates(const std::string& sampler, int reps, std::uint64_t seed) {
  const TmgProblem p = tmg_preset(2);
  const auto s = default_settings(sampler, 2);
  std::vector<Matrix> out(static_cast<std::size_t>(reps));
  parallel_for(reps, [&](int r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    out[static_cast<std::size_t>(r)] = run_tmg_chain(p, sampler, s, 20000, 2000, rng).draws;
  });
  return out;
}

Outcome bivariate_moments() {
  Outcome o{true, ""};
  for (const std::string s : {"rwm", "wall", "exact", "sph"}) {
    const MomentSummary m = summarize(tmg_replicates(s, 10, 1001));
    const double dm = (m.mean - kTruthMean).cwiseAbs().maxCoeff();
    const double dc = (m.covariance - kTruthCov).cwiseAbs().maxCoeff();
    o.pass = o.pass && dm <= 0.01 && dc <= 0.01;
    o.detail += s + " mean (" + fmt(m.mean[0]) + ", " + fmt(m.mean[1]) + ") |dmean| " + fmt(dm, 2) + " |dcov| " +
                fmt(dc, 2) + "; ";
  }
  return o;
}

Outcome exact_iid() {
  const TmgProblem p = tmg_preset(10);
  Rng rng(1002, 0);
  const ChainResult c = run_tmg_chain(p, "exact", default_settings("exact", 10), 100000, 10000, rng);
  const RunReport r = report(c);
  return {r.ess_min >= 0.95 * 100000, "ESS (" + fmt(r.ess_min, 6) + ", " + fmt(r.ess_med, 6) + ", " +
                                          fmt(r.ess_max, 6) + ") over N = 100000, need min >= 95000"};
}

Outcome ordering() {
  Outcome o{true, ""};
  for (Index d : {10, 100}) {
    BenchmarkOptions opts;
    opts.samples = 20000;
    opts.burnin = 2000;
    opts.seed = 1003;
    const auto entries = tmg_benchmark(tmg_preset(d), {"rwm", "wall", "exact", "sph"}, opts);
    std::map<std::string, double> rate;
    for (const auto& e : entries) rate[e.sampler] = e.report.min_ess_per_second;
    const bool rwm_lowest = std::all_of(rate.begin(), rate.end(), [&](const auto& kv) {
      return kv.first == "rwm" || kv.second > rate["rwm"];
    });
    o.pass = o.pass && rwm_lowest;
    o.detail += "D=" + std::to_string(d) + " minESS/s";
    for (const auto& e : entries) o.detail += " " + e.sampler + " " + fmt(rate[e.sampler], 4);
    o.detail += rwm_lowest ? " (rwm lowest)" : " (rwm NOT lowest)";
    if (d == 100) {
      const bool sph_wins = rate["sph"] > rate["exact"];
      o.pass = o.pass && sph_wins;
      o.detail += sph_wins ? " (sph > exact)" : " (sph NOT > exact)";
    }
    o.detail += "; ";
  }
  return o;
}

Outcome integrators() {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  Rng rng(1004, 0);
  Matrix cov(2, 2);
  cov << 1.0, 0.6, 0.6, 0.8;
  const TargetModel m = gaussian_model((Vector(2) << 0.2, -0.1).finished(), cov);

  double rev = 0.0, jac = 0.0;
  std::vector<double> coarse, fine;
  for (int k = 0; k < 100; ++k) {
    const PhaseState s{rng.normal_vector(2), rng.normal_vector(2)};
    PhaseState e = leapfrog(m, s, 0.1, 25);
    e.momentum = -e.momentum;
    const PhaseState back = leapfrog(m, e, 0.1, 25);
    rev = std::max({rev, (back.position - s.position).norm(), (back.momentum + s.momentum).norm()});
    const Vector z0 = rng.normal_vector(4);
    const Matrix J = oracle::fd_jacobian(
        [&](const Vector& z) -> Vector {
          const PhaseState f = leapfrog(m, PhaseState{z.head(2), z.tail(2)}, 0.2, 1);
          Vector out(4);
          out << f.position, f.momentum;
          return out;
        },
        z0, 1e-5);
    jac = std::max(jac, std::abs(J.determinant() - 1.0));
    const double h0 = hamiltonian(m, s);
    coarse.push_back(std::abs(hamiltonian(m, leapfrog(m, s, 0.2, 10)) - h0));
    fine.push_back(std::abs(hamiltonian(m, leapfrog(m, s, 0.05, 40)) - h0));
  }
  std::sort(coarse.begin(), coarse.end());
  std::sort(fine.begin(), fine.end());
  const double ratio = coarse[50] / fine[50];

  double refl = 0.0, geo_speed = 0.0, geo_sphere = 0.0, geo_tangent = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Vector phi = rng.normal_vector(5) * 3.0;
    const Vector n = rng.normal_vector(5).normalized();
    refl = std::max(refl, std::abs(reflect(phi, n).norm() - phi.norm()) / std::max(1.0, phi.norm()));
    const Vector x = rng.normal_vector(4).normalized();
    const Vector v = tangent_project(x, rng.normal_vector(4) * 2.0);
    const auto [x1, v1] = geodesic_update(x, v, 3.0 * rng.uniform());
    geo_speed = std::max(geo_speed, std::abs(v1.norm() - v.norm()) / std::max(1.0, v.norm()));
    geo_sphere = std::max(geo_sphere, std::abs(x1.norm() - 1.0));
    geo_tangent = std::max(geo_tangent, std::abs(x1.dot(v1)));
  }

  const EqualityManifold sphere{3, [](const Vector& t) -> Vector { return Vector::Constant(1, t.squaredNorm() - 1); },
                                [](const Vector& t) -> Matrix { return 2.0 * t.transpose(); }};
  const TargetModel g3 = gaussian_model((Vector(3) << 0.5, 0, 0).finished(), Matrix::Identity(3, 3));
  double cres = 0.0;
  RattleState rs{(Vector(3) << 0, 0, 1).finished(), Vector::Zero(3), {}, {}};
  for (int k = 0; k < 2000; ++k) {
    if (k % 10 == 0) rs.momentum = cotangent_project(sphere.jacobian(rs.position), rng.normal_vector(3));
    rs = rattle_step(g3, sphere, rs, 0.1);
    cres = std::max(cres, sphere.c(rs.position).cwiseAbs().maxCoeff());
  }
  const double secs = std::chrono::duration<double>(clock::now() - t0).count();

  const bool pass = rev <= 1e-10 && jac <= 1e-6 && ratio >= 12 && ratio <= 20 && refl <= 1e-14 &&
                    geo_speed <= 1e-14 && geo_sphere <= 1e-12 && geo_tangent <= 1e-10 && cres <= 1e-8 && secs < 60;
  return {pass, "reversibility " + fmt(rev, 2) + ", |det J - 1| " + fmt(jac, 2) + ", dH ratio " + fmt(ratio, 4) +
                    ", reflect " + fmt(refl, 2) + ", geodesic speed " + fmt(geo_speed, 2) + " sphere " +
                    fmt(geo_sphere, 2) + " tangency " + fmt(geo_tangent, 2) + ", rattle |c| " + fmt(cres, 2) + ", " +
                    fmt(secs, 2) + " s"};
}

Outcome oracle_equivalence() {
  const TmgProblem p = tmg_preset(2);
  Rng orng(1005, 0);
  const Matrix ref = oracle::rejection_tmg(p.spec.mean, p.spec.covariance, p.lower, p.upper, 400000, orng);
  Outcome o{true, ""};
  for (const std::string s : {"wall", "exact", "sph"}) {
    const double z = oracle::max_moment_z(tmg_replicates(s, 20, 1006), ref);
    o.pass = o.pass && z < 3.0;
    o.detail += s + " max |z| " + fmt(z, 3) + "; ";
  }
  return o;
}

Outcome uniform_ball() {
  const EffectivePotential pot(flat_model(3), TransformChain{});
  Rng rng(1007, 0);
  const LeapfrogConfig cfg{0.2, 10};
  const ChainResult c = run_chain([&](const Vector& x, Rng& r) { return sph_hmc_step(pot, x, cfg, r); },
                                  augment(Vector::Zero(3)), 100000, 1000, rng);
  std::vector<double> r3;
  for (Index i = 0; i < c.draws.rows(); ++i) r3.push_back(std::pow(c.draws.row(i).head(3).norm(), 3));
  const double ks = oracle::ks_statistic(r3, [](double u) { return std::clamp(u, 0.0, 1.0); });
  const double crit = oracle::ks_critical_1pct(r3.size());
  return {ks < crit, "KS " + fmt(ks, 4) + " vs 1% critical " + fmt(crit, 4) + " over " + std::to_string(r3.size())};
}

Outcome bridge() {
  Vector beta(10);
  beta << 3, 1.5, 0, 0, 2, 0, 0, 0, 0, 0;
  Outcome o{true, ""};
  double worst_z = 0.0;
  int zeros1 = 0, zeros08 = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng drng(seed, 1);
    const RegressionData data = synthetic_regression(200, beta, 3.0, drng);
    const RegressionData sd = standardize(data);
    const Vector ols = ols_fit(sd.X, sd.y);
    BridgeSettings st;
    st.samples = 4000;
    st.burnin = 1000;
    st.prior_variance = 1e6;
    std::map<double, int> zeros;
    for (double q : {1.0, 0.8}) {
      const double base = qnorm(ols, q);
      Rng rng(seed, 2);
      std::vector<double> radii;
      for (double f = 0.1; f < 0.52; f += 0.025) radii.push_back(f * base);
      radii.push_back(2 * base);
      const BridgePath path = bridge_fit(data, q, radii, st, rng);
      const auto& slack = path.points.back();
      for (Index i = 0; i < 10; ++i)
        worst_z = std::max(worst_z, std::abs(slack.posterior_mean[i] - ols[i]) / slack.posterior_sd[i]);
      const auto best = std::min_element(path.points.begin(), path.points.end() - 1, [](const auto& a, const auto& b) {
        return std::abs(a.shrinkage - 0.25) < std::abs(b.shrinkage - 0.25);
      });
      zeros[q] = count_near_zero(best->posterior_mean, ols);
      per_seed += (q == 1.0 ? " seed " + std::to_string(seed) + ": q=1 " : " q=0.8 ") + std::to_string(zeros[q]) +
                  " (s " + fmt(best->shrinkage, 2) + ")";
    }
    zeros1 += zeros[1.0];
    zeros08 += zeros[0.8];
  }
  const bool slack_ok = worst_z <= 2.0;
  const bool shrink_ok = zeros08 >= zeros1;
  o.pass = slack_ok && shrink_ok;
  o.detail = "slack max |mean - ols| / sd " + fmt(worst_z, 3) + "; near-zero totals q=0.8 " + std::to_string(zeros08) +
             " vs q=1 " + std::to_string(zeros1) + ";" + per_seed;
  return o;
}

Outcome density() {
  Rng rng(1008, 0);
  const auto mix = reference_mixture();
  Matrix data(1000, 1);
  for (Index i = 0; i < 1000; ++i) data(i, 0) = mix.sample(rng);
  const DensityFit fit = density_fit(data, 20, 1.2, DensitySettings{}, rng);
  Matrix grid(512, 1);
  for (Index i = 0; i < 512; ++i) grid(i, 0) = (static_cast<double>(i) + 0.5) / 512.0;
  const Vector d = eval_density(fit.draws, fit.model.basis, grid);
  double l1 = 0.0;
  for (Index i = 0; i < 512; ++i) l1 += std::abs(d[i] - mix.pdf(grid(i, 0))) / 512.0;
  const double dev = (fit.draws.rowwise().squaredNorm().array() - 1.0).abs().maxCoeff();
  return {l1 < 0.15 && dev <= 1e-12, "L1 " + fmt(l1, 3) + ", max |sum q^2 - 1| " + fmt(dev, 2) + ", AP " +
                                         fmt(fit.acceptance, 3)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "consamp_acceptance";
  std::vector<std::vector<std::string>> runs;
  for (const std::string s : {"rwm", "hmc", "wall", "exact", "sph"})
    runs.push_back({"sample", "--model", "tmg", "--dim", "10", "--sampler", s, "--samples", "2000", "--replicates", "2"});
  runs.push_back({"sample", "--model", "density", "--dim", "8", "--sampler", "chmc", "--samples", "500"});
  runs.push_back({"sample", "--model", "bridge", "--dim", "5", "--sampler", "sph", "--samples", "500"});
  runs.push_back({"density", "--samples", "200", "--burnin", "100"});
  int identical = 0;
  std::ostringstream sink;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::string bytes[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (std::to_string(k) + "_" + std::to_string(rep));
      fs::remove_all(dir);
      auto args = runs[k];
      args.insert(args.end(), {"--seed", "1009", "--out", dir.string()});
      if (run_cli(args, sink, sink) != 0) return {false, "run failed: " + sink.str()};
      bytes[rep] = slurp(dir / "samples.csv");
    }
    if (!bytes[0].empty() && bytes[0] == bytes[1]) ++identical;
  }
  return {identical == static_cast<int>(runs.size()),
          std::to_string(identical) + " of " + std::to_string(runs.size()) + " repeated runs byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"bivariate-moments", bivariate_moments},          {"exact-near-iid", exact_iid},   {"efficiency-ordering", ordering},
      {"integrator-properties", integrators}, {"oracle-equivalence", oracle_equivalence},
      {"uniform-ball", uniform_ball},       {"bridge-regression", bridge},   {"density-estimation", density},
      {"determinism", determinism}};
  std::set<std::string> only, known;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") only.insert(argv[i + 1]);
    else if (flag == "--known-failure") known.insert(argv[i + 1]);
  }
  int unexpected = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool excused = !o.pass && known.count(name);
    if (!o.pass && !excused) ++unexpected;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << fmt(secs, 3) << " s] " << o.detail
              << (excused ? " (known failure)" : "") << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}
