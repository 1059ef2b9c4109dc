#include "consamp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>

namespace consamp {

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"sample", "tmg-bench", "bridge", "density"};
  return names;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

void add_common(CLI::App& app, RunConfig& c) {
  app.add_option("--config", c.config_file, "File of `key = value` lines");
  app.add_option("--seed", c.seed, "Random seed");
  app.add_option("--samples", c.samples, "Retained draws per chain");
  app.add_option("--burnin", c.burnin, "Discarded initial iterations");
  app.add_option("--replicates", c.replicates, "Independent chains");
  app.add_option("--out", c.output_dir, "Output directory");
  app.add_option("--eps", c.eps, "Leapfrog step size");
  app.add_option("--leaps", c.leaps, "Leapfrog steps per iteration");
  app.add_option("--jitter", c.jitter, "Relative step-size jitter");
}

std::unique_ptr<CLI::App> build_app(RunConfig& c) {
  auto app = std::make_unique<CLI::App>("Constrained HMC samplers", "consamp");
  app->require_subcommand(1);

  auto* sample = app->add_subcommand("sample", "Sample a built-in model");
  add_common(*sample, c);
  sample->add_option("--model", c.model, "tmg, bridge, density or uniform-ball");
  sample->add_option("--dim", c.dim, "Model dimension");
  sample->add_option("--sampler", c.sampler, "Sampler name");
  sample->add_option("--scale", c.scale, "Random-walk proposal scale");
  sample->add_option("--travel-time", c.travel_time, "Exact-HMC travel time");

  auto* bench = app->add_subcommand("tmg-bench", "Truncated Gaussian benchmark");
  add_common(*bench, c);
  bench->add_option("--dim", c.dim, "Dimension (2 gives the bivariate box problem)");
  bench->add_option("--samplers", c.samplers, "Comma-separated samplers")->delimiter(',');
  bench->add_option("--scale", c.scale, "Random-walk proposal scale");
  bench->add_option("--travel-time", c.travel_time, "Exact-HMC travel time");
  bench->add_option("--grid", c.grid, "Histogram grid size per axis (dim 2)");

  auto* bridge = app->add_subcommand("bridge", "Bayesian bridge regression path");
  add_common(*bridge, c);
  bridge->add_option("--input", c.input, "CSV with predictors and a `y` column");
  bridge->add_option("--q", c.q, "Comma-separated norm orders")->delimiter(',');
  bridge->add_option("--r", c.r, "Comma-separated radii (default: a grid scaled by the OLS norm)")->delimiter(',');
  bridge->add_option("--grid-points", c.grid_points, "Radii in the default grid");

  auto* density = app->add_subcommand("density", "Spherical density estimation");
  add_common(*density, c);
  density->add_option("--input", c.input, "CSV with column x (and y for the unit square)");
  density->add_option("--basis", c.basis, "Number of basis functions");
  density->add_option("--decay", c.decay, "Prior decay rate");
  density->add_option("--domain-dim", c.domain_dim, "1 (interval) or 2 (square) for synthetic data");
  density->add_option("--n", c.n, "Synthetic data size");
  density->add_option("--grid", c.grid, "Evaluation grid size per axis");
  return app;
}

bool on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

// Turns config lines into flags for keys not given on the command line.
std::vector<std::string> config_flags(const std::string& path, const CLI::App& sub,
                                      const std::vector<std::string>& args) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::string> known;
  for (const auto* opt : sub.get_options()) {
    for (const auto& n : opt->get_lnames())
      if (n != "config" && n != "help") known.push_back(n);
  }
  std::vector<std::string> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw UsageError(where + "expected `key = value`: " + trim(line));
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw UsageError(where + "unknown key '" + key + "' for " + sub.get_name() + ": " + trim(line));
    if (on_command_line(args, key)) continue;
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

const std::map<std::string, std::vector<std::string>>& required_flags() {
  static const std::map<std::string, std::vector<std::string>> req{
      {"sample", {"model", "dim", "sampler"}}, {"tmg-bench", {"dim"}}, {"bridge", {}}, {"density", {}}};
  return req;
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw UsageError(m); };
  if (samples && *samples <= 0) fail("--samples must be > 0");
  if (burnin && *burnin < 0) fail("--burnin must be >= 0");
  if (eps && !(*eps > 0.0)) fail("--eps must be > 0");
  if (leaps && *leaps < 1) fail("--leaps must be >= 1");
  if (jitter && !(*jitter >= 0.0 && *jitter < 1.0)) fail("--jitter must be in [0, 1)");
  if (scale && !(*scale > 0.0)) fail("--scale must be > 0");
  if (travel_time && !(*travel_time > 0.0)) fail("--travel-time must be > 0");
  if (replicates < 1) fail("--replicates must be >= 1");
  if ((command == "sample" || command == "tmg-bench") && dim < 1) fail("--dim must be >= 1");
  if (command == "tmg-bench" && dim < 2) fail("--dim must be >= 2 for tmg-bench");
  for (double x : q)
    if (!(x > 0.0)) fail("--q values must be > 0");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0)) fail("--r values must be > 0");
    if (i > 0 && !(r[i] > r[i - 1])) fail("--r values must be increasing");
  }
  if (grid_points < 1) fail("--grid-points must be >= 1");
  if (basis && *basis < 1) fail("--basis must be >= 1");
  if (!(decay > 0.0)) fail("--decay must be > 0");
  if (domain_dim != 1 && domain_dim != 2) fail("--domain-dim must be 1 or 2");
  if (n < 1) fail("--n must be >= 1");
  if (grid && *grid < 2) fail("--grid must be >= 2");
}

RunConfig parse_config(const std::vector<std::string>& args) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    RunConfig scratch;
    throw HelpRequested{build_app(scratch)->help()};
  }
  const auto& cmds = command_names();
  if (std::find(cmds.begin(), cmds.end(), args[0]) == cmds.end())
    throw UsageError("unknown command '" + args[0] + "'; valid commands: " + join(cmds));

  RunConfig cfg;
  auto app = build_app(cfg);
  std::vector<std::string> full{args[0]};
  if (const auto path = config_path(args)) {
    const auto extra = config_flags(*path, *app->get_subcommand(args[0]), args);
    full.insert(full.end(), extra.begin(), extra.end());
  }
  full.insert(full.end(), args.begin() + 1, args.end());
  std::reverse(full.begin(), full.end());
  try {
    app->parse(full);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app->get_subcommand(args[0])->help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  cfg.command = args[0];

  std::vector<std::string> missing;
  const auto* sub = app->get_subcommand(args[0]);
  for (const auto& key : required_flags().at(cfg.command))
    if (sub->get_option("--" + key)->count() == 0) missing.push_back("--" + key);
  if (!missing.empty()) throw UsageError("missing required flags for " + cfg.command + ": " + join(missing));

  if (cfg.output_dir.empty()) {
    const char* env = std::getenv("CONSAMP_OUTPUT_DIR");
    cfg.output_dir = (env && *env) ? std::filesystem::path(env) : std::filesystem::path(".");
  }
  cfg.validate();
  return cfg;
}

}  // namespace consamp
