#include "consamp/applications/bridge.hpp"
#include "consamp/applications/density.hpp"
#include "consamp/applications/tmg.hpp"
#include "consamp/cli.hpp"
#include "consamp/error.hpp"
#include "consamp/io.hpp"
#include "consamp/parallel.hpp"
#include "consamp/rattle.hpp"
#include "consamp/registry.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace consamp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kSampleTol = 1e-10;

json settings_json(const SamplerSettings& s) {
  return {{"step_size", s.step_size},
          {"steps", s.steps},
          {"jitter", s.jitter},
          {"proposal_scale", s.proposal_scale},
          {"travel_time", s.travel_time}};
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void apply_overrides(const RunConfig& c, SamplerSettings& s) {
  if (c.eps) s.step_size = *c.eps;
  if (c.leaps) s.steps = *c.leaps;
  if (c.jitter) s.jitter = *c.jitter;
  if (c.scale) s.proposal_scale = *c.scale;
  if (c.travel_time) s.travel_time = *c.travel_time;
}

void prepare_output(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void require_feasible(const ConstraintSet& cs, const Matrix& draws) {
  const double tol = cs.is_equality() ? kManifoldTol : kSampleTol;
  for (Index i = 0; i < draws.rows(); ++i) {
    if (!is_feasible(cs, draws.row(i).transpose(), tol))
      throw SamplerError("draw " + std::to_string(i + 1) + " violates the constraint");
  }
}

Matrix stack(const std::vector<ChainResult>& chains) {
  Index rows = 0;
  for (const auto& c : chains) rows += c.draws.rows();
  Matrix out(rows, chains.front().draws.cols());
  Index at = 0;
  for (const auto& c : chains) {
    out.middleRows(at, c.draws.rows()) = c.draws;
    at += c.draws.rows();
  }
  return out;
}

void run_sample(const RunConfig& c, std::ostream& out) {
  const Problem p = make_problem(c.model, c.dim);
  if (std::find(p.samplers.begin(), p.samplers.end(), c.sampler) == p.samplers.end()) {
    std::string list;
    for (const auto& s : p.samplers) list += (list.empty() ? "" : ", ") + s;
    throw UsageError("sampler '" + c.sampler + "' is not available for model '" + c.model + "'; valid samplers: " + list);
  }
  SamplerSettings s = p.defaults.at(c.sampler);
  apply_overrides(c, s);
  const long samples = c.samples.value_or(1000);
  const long burnin = c.burnin.value_or(500);

  std::vector<ChainResult> chains(static_cast<std::size_t>(c.replicates));
  parallel_for(c.replicates, [&](int r) {
    Rng rng(c.seed, static_cast<std::uint64_t>(r));
    chains[static_cast<std::size_t>(r)] = run_problem_chain(p, c.sampler, s, samples, burnin, rng);
  });
  const Matrix draws = stack(chains);
  if (p.constraints) require_feasible(*p.constraints, draws);
  const RunReport rep = report(chains);

  prepare_output(c.output_dir);
  write_csv(c.output_dir / "samples.csv", theta_header(p.dim), draws);
  const json j = {{"command", "sample"},       {"model", c.model},     {"sampler", c.sampler},
                  {"dim", p.dim},              {"seed", c.seed},       {"samples", samples},
                  {"burnin", burnin},          {"replicates", c.replicates},
                  {"settings", settings_json(s)}, {"report", to_json(rep)}};
  write_text(c.output_dir / "report.json", j.dump(2) + "\n");
  out << c.model << " / " << c.sampler << ": " << draws.rows() << " draws, AP " << std::setprecision(3)
      << rep.acceptance_probability << ", min ESS " << std::fixed << std::setprecision(0) << rep.ess_min << "\n";
  out.unsetf(std::ios::floatfield);
}

void write_histogram(const fs::path& path, const TmgProblem& p, const std::vector<ChainResult>& chains, int n) {
  const double hx = (p.upper[0] - p.lower[0]) / n;
  const double hy = (p.upper[1] - p.lower[1]) / n;
  Matrix counts = Matrix::Zero(n, n);
  double total = 0.0;
  for (const auto& c : chains) {
    for (Index i = 0; i < c.draws.rows(); ++i) {
      const int a = std::clamp(static_cast<int>((c.draws(i, 0) - p.lower[0]) / hx), 0, n - 1);
      const int b = std::clamp(static_cast<int>((c.draws(i, 1) - p.lower[1]) / hy), 0, n - 1);
      counts(a, b) += 1.0;
      total += 1.0;
    }
  }
  Matrix rows(static_cast<Index>(n) * n, 3);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      rows.row(static_cast<Index>(a) * n + b) << p.lower[0] + (a + 0.5) * hx, p.lower[1] + (b + 0.5) * hy,
          counts(a, b) / (total * hx * hy);
    }
  }
  write_csv(path, {"x", "y", "density"}, rows);
}

void run_tmg_bench(const RunConfig& c, std::ostream& out) {
  const TmgProblem p = tmg_preset(c.dim);
  std::vector<std::string> samplers = c.samplers;
  if (samplers.empty()) samplers = {"rwm", "wall", "exact", "sph"};
  const auto& valid = tmg_sampler_names();
  for (const auto& s : samplers) {
    if (std::find(valid.begin(), valid.end(), s) == valid.end()) {
      std::string list;
      for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
      throw UsageError("unknown sampler '" + s + "'; valid samplers: " + list);
    }
  }
  BenchmarkOptions o;
  o.samples = c.samples.value_or(20000);
  o.burnin = c.burnin.value_or(2000);
  o.replicates = c.replicates;
  o.seed = c.seed;
  o.step_size = c.eps.value_or(0.0);
  o.steps = c.leaps.value_or(0);
  o.proposal_scale = c.scale.value_or(0.0);
  o.travel_time = c.travel_time.value_or(0.0);
  auto entries = tmg_benchmark(p, samplers, o);
  for (const auto& e : entries)
    for (const auto& ch : e.chains) require_feasible(p.constraints, ch.draws);

  prepare_output(c.output_dir);
  json results = json::array();
  for (const auto& e : entries) {
    results.push_back({{"sampler", e.sampler}, {"settings", settings_json(e.settings)}, {"report", to_json(e.report)}});
    write_csv(c.output_dir / ("samples_" + e.sampler + ".csv"), theta_header(c.dim), e.chains.front().draws);
    if (c.grid && c.dim == 2) write_histogram(c.output_dir / ("grid_" + e.sampler + ".csv"), p, e.chains, *c.grid);
  }
  const json j = {{"command", "tmg-bench"}, {"dim", c.dim},       {"samples", o.samples}, {"burnin", o.burnin},
                  {"replicates", o.replicates}, {"seed", c.seed}, {"results", results}};
  write_text(c.output_dir / "report.json", j.dump(2) + "\n");

  out << std::left << std::setw(8) << "sampler" << std::setw(8) << "AP" << std::setw(12) << "s/iter" << std::setw(30)
      << "ESS (min, med, max)" << std::setw(14) << "minESS/s" << "speedup\n";
  for (const auto& e : entries) {
    const RunReport& r = e.report;
    std::ostringstream ess;
    ess << std::fixed << std::setprecision(0) << "(" << r.ess_min << ", " << r.ess_med << ", " << r.ess_max << ")";
    out << std::left << std::setw(8) << e.sampler << std::setw(8) << std::fixed << std::setprecision(2)
        << r.acceptance_probability << std::setw(12) << std::scientific << std::setprecision(2)
        << r.seconds_per_iteration << std::setw(30) << ess.str() << std::setw(14) << std::fixed
        << std::setprecision(1) << r.min_ess_per_second << std::setprecision(2) << r.speedup.value_or(0.0) << "\n";
  }
  if (c.dim == 2) {
    out << "\nsampler mean1            mean2            var1             cov12            var2\n";
    for (const auto& e : entries) {
      const MomentSummary& m = *e.report.moment_estimates;
      auto cell = [&](double v, double sd) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << v << "+-" << sd;
        return s.str();
      };
      out << std::left << std::setw(8) << e.sampler << std::setw(17) << cell(m.mean[0], m.mean_sd[0]) << std::setw(17)
          << cell(m.mean[1], m.mean_sd[1]) << std::setw(17) << cell(m.covariance(0, 0), m.covariance_sd(0, 0))
          << std::setw(17) << cell(m.covariance(0, 1), m.covariance_sd(0, 1))
          << cell(m.covariance(1, 1), m.covariance_sd(1, 1)) << "\n";
    }
  }
  out.unsetf(std::ios::floatfield);
}

RegressionData load_regression(const RunConfig& c) {
  if (!c.input) {
    Rng rng(c.seed, 1000);
    Vector beta(10);
    beta << 3, 1.5, 0, 0, 2, 0, 0, 0, 0, 0;
    return synthetic_regression(200, beta, 3.0, rng);
  }
  const CsvTable t = read_csv(*c.input);
  const Index yc = t.column("y");
  if (yc < 0) throw UsageError(c.input->string() + ": no column named y");
  RegressionData d;
  d.y = t.values.col(yc);
  d.X.resize(t.values.rows(), t.values.cols() - 1);
  for (Index j = 0, k = 0; j < t.values.cols(); ++j)
    if (j != yc) d.X.col(k++) = t.values.col(j);
  return d;
}

void run_bridge(const RunConfig& c, std::ostream& out) {
  const RegressionData data = load_regression(c);
  const RegressionData sd = standardize(data);
  const Vector ols = ols_fit(sd.X, sd.y);
  const Index D = ols.size();
  const std::vector<double> qs = c.q.empty() ? std::vector<double>{1.0, 0.8} : c.q;

  BridgeSettings st;
  st.samples = c.samples.value_or(st.samples);
  st.burnin = c.burnin.value_or(st.burnin);
  st.step_size = c.eps.value_or(st.step_size);
  st.steps = c.leaps.value_or(st.steps);
  st.jitter = c.jitter.value_or(st.jitter);

  std::vector<BridgePath> paths(qs.size());
  parallel_for(static_cast<int>(qs.size()), [&](int k) {
    const double q = qs[static_cast<std::size_t>(k)];
    std::vector<double> grid = c.r;
    if (grid.empty()) {
      const double base = qnorm(ols, q);
      const int g = c.grid_points;
      for (int i = 0; i < g; ++i) grid.push_back(base * (g == 1 ? 1.0 : 0.05 + 1.2 * i / (g - 1)));
    }
    Rng rng(c.seed, 2000 + static_cast<std::uint64_t>(k));
    paths[static_cast<std::size_t>(k)] = bridge_fit(data, q, grid, st, rng);
  });
  for (const auto& path : paths) {
    for (const auto& pt : path.points) {
      for (Index i = 0; i < pt.draws.rows(); ++i) {
        if (qnorm(pt.draws.row(i).transpose(), path.q) > pt.r * (1.0 + kSampleTol))
          throw SamplerError("bridge draw outside the q-norm ball");
      }
    }
  }

  prepare_output(c.output_dir);
  std::vector<std::string> header{"q", "r", "shrinkage", "acceptance"};
  for (Index i = 1; i <= D; ++i) header.push_back("beta" + std::to_string(i));
  Index rows = 0;
  for (const auto& p : paths) rows += static_cast<Index>(p.points.size());
  Matrix table(rows, 4 + D);
  json jpaths = json::array();
  Index at = 0;
  out << "q      r          s       AP      near-zero\n";
  for (const auto& p : paths) {
    json points = json::array();
    for (const auto& pt : p.points) {
      table.row(at) << p.q, pt.r, pt.shrinkage, pt.acceptance, pt.posterior_mean.transpose();
      ++at;
      const int zeros = count_near_zero(pt.posterior_mean, ols);
      points.push_back({{"r", pt.r},
                        {"shrinkage", pt.shrinkage},
                        {"acceptance", pt.acceptance},
                        {"posterior_mean", vec_json(pt.posterior_mean)},
                        {"posterior_sd", vec_json(pt.posterior_sd)},
                        {"mc_standard_error", vec_json(pt.mc_standard_error)},
                        {"near_zero", zeros}});
      out << std::fixed << std::setprecision(2) << std::setw(7) << std::left << p.q << std::setw(11)
          << std::setprecision(4) << pt.r << std::setw(8) << std::setprecision(3) << pt.shrinkage << std::setw(8)
          << std::setprecision(2) << pt.acceptance << zeros << "\n";
    }
    jpaths.push_back({{"q", p.q}, {"points", points}});
  }
  out.unsetf(std::ios::floatfield);
  write_csv(c.output_dir / "path.csv", header, table);
  const json j = {{"command", "bridge"},      {"seed", c.seed},     {"samples", st.samples}, {"burnin", st.burnin},
                  {"ols", vec_json(ols)},     {"paths", jpaths}};
  write_text(c.output_dir / "report.json", j.dump(2) + "\n");
}

void run_density(const RunConfig& c, std::ostream& out) {
  Matrix data;
  int dim = c.domain_dim;
  const auto mix = reference_mixture();
  const TruncatedGaussianMixture second{{0.5}, {0.15}, {1.0}};
  if (c.input) {
    const CsvTable t = read_csv(*c.input);
    const Index xc = t.column("x");
    const Index yc = t.column("y");
    if (xc < 0) throw UsageError(c.input->string() + ": no column named x");
    dim = yc < 0 ? 1 : 2;
    data.resize(t.values.rows(), dim);
    data.col(0) = t.values.col(xc);
    if (dim == 2) data.col(1) = t.values.col(yc);
  } else {
    Rng rng(c.seed, 3000);
    data.resize(c.n, dim);
    for (Index i = 0; i < c.n; ++i) {
      data(i, 0) = mix.sample(rng);
      if (dim == 2) data(i, 1) = second.sample(rng);
    }
  }
  const int L = c.basis.value_or(dim == 1 ? 20 : 100);
  DensitySettings st;
  if (dim == 2) {
    st.step_size = 0.0003;
    st.steps = 60;
  }
  st.samples = c.samples.value_or(st.samples);
  st.burnin = c.burnin.value_or(st.burnin);
  st.step_size = c.eps.value_or(st.step_size);
  st.steps = c.leaps.value_or(st.steps);
  st.jitter = c.jitter.value_or(st.jitter);

  Rng rng(c.seed, 0);
  const DensityFit fit = density_fit(data, L, c.decay, st, rng);
  for (Index i = 0; i < fit.draws.rows(); ++i) {
    if (std::abs(fit.draws.row(i).squaredNorm() - 1.0) > 1e-12) throw SamplerError("density draw left the sphere");
  }

  const int n = c.grid.value_or(dim == 1 ? 512 : 64);
  Matrix grid(dim == 1 ? n : static_cast<Index>(n) * n, dim);
  for (int a = 0; a < n; ++a) {
    if (dim == 1) {
      grid(a, 0) = (a + 0.5) / n;
      continue;
    }
    for (int b = 0; b < n; ++b) grid.row(static_cast<Index>(a) * n + b) << (a + 0.5) / n, (b + 0.5) / n;
  }
  const Vector dens = eval_density(fit.draws, fit.model.basis, grid);
  const double cell = std::pow(1.0 / n, dim);
  const double integral = dens.sum() * cell;

  json j = {{"command", "density"}, {"seed", c.seed},         {"basis", L},           {"decay", c.decay},
            {"domain_dim", dim},   {"data_size", data.rows()}, {"samples", st.samples}, {"burnin", st.burnin},
            {"acceptance", fit.acceptance}, {"integral", integral}};
  if (!c.input) {
    double l1 = 0.0;
    for (Index i = 0; i < grid.rows(); ++i) {
      const double truth = dim == 1 ? mix.pdf(grid(i, 0)) : mix.pdf(grid(i, 0)) * second.pdf(grid(i, 1));
      l1 += std::abs(dens[i] - truth) * cell;
    }
    j["l1_error"] = l1;
  }

  prepare_output(c.output_dir);
  write_csv(c.output_dir / "samples.csv", theta_header(L), fit.draws);
  Matrix rows(grid.rows(), dim + 1);
  rows << grid, dens;
  write_csv(c.output_dir / "grid.csv", dim == 1 ? std::vector<std::string>{"x", "density"}
                                                : std::vector<std::string>{"x", "y", "density"},
            rows);
  write_text(c.output_dir / "report.json", j.dump(2) + "\n");
  out << "density: L = " << L << ", AP " << std::setprecision(3) << fit.acceptance << ", integral " << integral;
  if (j.contains("l1_error")) out << ", L1 error " << j["l1_error"].get<double>();
  out << "\n";
}

}  // namespace

void run_command(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  if (cfg.command == "sample") return run_sample(cfg, out);
  if (cfg.command == "tmg-bench") return run_tmg_bench(cfg, out);
  if (cfg.command == "bridge") return run_bridge(cfg, out);
  if (cfg.command == "density") return run_density(cfg, out);
  throw UsageError("unknown command '" + cfg.command + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    run_command(parse_config(args), out);
    return kExitOk;
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const SamplerError& e) {
    err << "sampler failure: " << e.what() << "\n";
    return kExitSampler;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "sampler failure: " << e.what() << "\n";
    return kExitSampler;
  }
}

}  // namespace consamp
