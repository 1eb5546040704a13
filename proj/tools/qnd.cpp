// Command-line front end: hypothesis validation, weight synthesis, seeded
// ensemble simulation and report generation for the photon-box feedback
// stabilizer.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "qnd/ensemble.hpp"
#include "qnd/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitHypothesis = 2;

struct CliOptions {
  std::string config_path;
  std::string preset = "photonbox";
  std::string mode = "closed";
  std::string controller = "quadratic";
  int trajectories = 100;
  int steps = 200;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
  std::string kraus_path;

  // Model parameters; phi0 is recomputed from target and theta unless set
  // explicitly (by flag or config key).
  int n_max = 10;
  double theta = std::sqrt(2.0) / 5.0;
  std::optional<double> phi0;
  int target = 3;
  double epsilon = 1.0 / 42.0;
  double u_bound = 0.1;
  double init_alpha = std::sqrt(3.0);
};

// Flat key=value file; '#' starts a comment. Flags given on the command line
// win over config keys, so the file is applied only where the flag was left
// at its default.
void apply_config_file(CliOptions& opt, const CLI::App& cmd) {
  std::ifstream in(opt.config_path);
  if (!in) throw qnd::ConfigError("cannot read config file " + opt.config_path);
  auto flag_given = [&](const std::string& name) {
    const CLI::Option* o = cmd.get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) {
      throw qnd::ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "preset" && !flag_given("--preset")) opt.preset = value;
      else if (key == "mode" && !flag_given("--mode")) opt.mode = value;
      else if (key == "controller" && !flag_given("--controller")) opt.controller = value;
      else if (key == "trajectories" && !flag_given("--trajectories")) opt.trajectories = std::stoi(value);
      else if (key == "steps" && !flag_given("--steps")) opt.steps = std::stoi(value);
      else if (key == "seed" && !flag_given("--seed")) opt.seed = std::stoull(value);
      else if (key == "out" && !flag_given("--out")) opt.out = value;
      else if (key == "threads" && !flag_given("--threads")) opt.threads = std::stoi(value);
      else if (key == "kraus" && !flag_given("--kraus")) opt.kraus_path = value;
      else if (key == "n_max" && !flag_given("--n-max")) opt.n_max = std::stoi(value);
      else if (key == "theta" && !flag_given("--theta")) opt.theta = std::stod(value);
      else if (key == "phi0" && !flag_given("--phi0")) opt.phi0 = std::stod(value);
      else if (key == "target" && !flag_given("--target")) opt.target = std::stoi(value);
      else if (key == "epsilon" && !flag_given("--epsilon")) opt.epsilon = std::stod(value);
      else if (key == "u_bound" && !flag_given("--u-bound")) opt.u_bound = std::stod(value);
      else if (key == "init_alpha" && !flag_given("--init-alpha")) opt.init_alpha = std::stod(value);
      else if (key == "preset" || key == "mode" || key == "controller") {
        // flag given; config ignored
      } else if (key != "trajectories" && key != "steps" && key != "seed" && key != "out" &&
                 key != "threads" && key != "kraus" && key != "n_max" && key != "theta" &&
                 key != "phi0" && key != "target" && key != "epsilon" && key != "u_bound" &&
                 key != "init_alpha") {
        throw qnd::ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw qnd::ConfigError("config line " + std::to_string(line_no) + ": bad value for '" + key + "'");
    }
  }
}

qnd::SimulationConfig build_config(const CliOptions& opt) {
  if (opt.preset != "photonbox") {
    throw qnd::ConfigError("unknown preset '" + opt.preset + "' (available: photonbox)");
  }
  if (opt.trajectories < 1 || opt.steps < 1) {
    throw qnd::ConfigError("trajectories and steps must be >= 1");
  }
  qnd::SimulationConfig cfg;
  cfg.preset = opt.preset;
  cfg.params.n_max = opt.n_max;
  cfg.params.theta = opt.theta;
  cfg.params.target = opt.target;
  cfg.params.phi0 = opt.phi0 ? *opt.phi0 : M_PI / 4.0 - opt.target * opt.theta;
  cfg.params.epsilon = opt.epsilon;
  cfg.params.u_bound = opt.u_bound;
  cfg.init_alpha = opt.init_alpha;
  if (opt.mode == "open") cfg.mode = qnd::LoopMode::Open;
  else if (opt.mode == "closed") cfg.mode = qnd::LoopMode::Closed;
  else throw qnd::ConfigError("mode must be 'open' or 'closed'");
  if (opt.controller == "exact") cfg.controller = qnd::ControlMode::Exact;
  else if (opt.controller == "quadratic") cfg.controller = qnd::ControlMode::Quadratic;
  else throw qnd::ConfigError("controller must be 'exact' or 'quadratic'");
  cfg.trajectories = opt.trajectories;
  cfg.steps = opt.steps;
  cfg.base_seed = opt.seed;
  cfg.output_dir = opt.out;
  cfg.threads = std::max(1, opt.threads);
  return cfg;
}

int run_validate(const CliOptions& opt) {
  if (!opt.kraus_path.empty()) {
    const qnd::KrausValidation v = qnd::load_kraus_json(opt.kraus_path);
    if (v.ok()) {
      std::cout << "kraus file: PASS (" << v.set->count() << " operators, dim "
                << v.set->dim() << ")\n";
    } else {
      std::cout << "kraus file: FAIL\n" << v.describe();
      return kExitHypothesis;
    }
  }
  const qnd::SimulationConfig cfg = build_config(opt);
  const qnd::ModelReport report = qnd::validate_model(cfg);
  for (const auto& c : report.checks) {
    std::cout << c.name << ": " << (c.pass ? "PASS" : "FAIL");
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
  }
  return report.all_pass() ? kExitOk : kExitHypothesis;
}

int run_synthesize(const CliOptions& opt) {
  const qnd::SimulationConfig cfg = build_config(opt);
  // Throws HypothesisViolation on an inadmissible epsilon or broken
  // assumptions; main() maps that to exit code 2.
  const qnd::ClosedLoopContext ctx = qnd::photonbox_context(cfg.params, cfg.controller);
  const qnd::LyapunovWeights& w = ctx.weights();
  std::cout << "target: " << w.target << ", epsilon: " << w.epsilon
            << ", residual: " << w.residual << "\n";
  std::cout << "n,sigma\n";
  for (Eigen::Index n = 0; n < w.sigma.size(); ++n) {
    std::cout << n << "," << w.sigma(n) << "\n";
  }
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    qnd::write_sigma_csv((fs::path(opt.out) / "sigma.csv").string(), w);
    std::cout << "wrote " << (fs::path(opt.out) / "sigma.csv").string() << "\n";
  }
  return kExitOk;
}

int run_simulate(const CliOptions& opt) {
  const qnd::SimulationConfig cfg = build_config(opt);
  const qnd::ModelReport report = qnd::validate_model(cfg);
  if (!report.all_pass()) {
    for (const auto& c : report.checks) {
      if (!c.pass) std::cerr << c.name << ": FAIL (" << c.detail << ")\n";
    }
    return kExitHypothesis;
  }
  const qnd::EnsembleResult res = qnd::run_ensemble(cfg);
  if (!cfg.output_dir.empty() && cfg.mode == qnd::LoopMode::Closed) {
    const qnd::ClosedLoopContext ctx = qnd::photonbox_context(cfg.params, cfg.controller);
    qnd::write_sigma_csv((fs::path(cfg.output_dir) / "sigma.csv").string(), ctx.weights());
  }
  std::cout << qnd::render_report(res.summary, cfg.params.target);
  if (!cfg.output_dir.empty()) std::cout << "artifacts in " << cfg.output_dir << "\n";
  return res.summary.failed_seeds.empty() ? kExitOk : kExitRuntime;
}

int run_report(const CliOptions& opt) {
  if (opt.out.empty()) throw qnd::ConfigError("report needs --out DIR with a summary.json");
  const fs::path path = fs::path(opt.out) / "summary.json";
  std::ifstream in(path);
  if (!in) throw qnd::ConfigError("cannot read " + path.string());
  json j;
  in >> j;

  qnd::EnsembleSummary s;
  s.trajectories = j.at("config").at("trajectories").get<int>();
  s.steps = j.at("config").at("steps").get<int>();
  s.base_seed = j.at("config").at("base_seed").get<std::uint64_t>();
  const auto mf = j.at("mean_fidelity").get<std::vector<double>>();
  s.mean_fidelity = Eigen::Map<const Eigen::VectorXd>(mf.data(), static_cast<Eigen::Index>(mf.size()));
  s.final_fidelity = j.at("final_fidelity").get<std::vector<double>>();
  s.convergence_steps = j.at("convergence_steps").get<std::vector<int>>();
  s.converged_count = j.at("converged_count").get<int>();
  s.failed_seeds = j.at("failed_seeds").get<std::vector<std::uint64_t>>();
  s.wall_seconds = j.at("wall_seconds").get<double>();
  if (j.contains("p_hat")) {
    const auto ph = j.at("p_hat").get<std::vector<double>>();
    const auto se = j.at("std_err").get<std::vector<double>>();
    s.p_hat = Eigen::Map<const Eigen::VectorXd>(ph.data(), static_cast<Eigen::Index>(ph.size()));
    s.std_err = Eigen::Map<const Eigen::VectorXd>(se.data(), static_cast<Eigen::Index>(se.size()));
  }

  const auto target = j.at("config").at("target").get<Eigen::Index>();
  std::cout << qnd::render_report(s, target);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time quantum measurement and feedback-stabilization simulator"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "flat key=value config file (flags win)");
    cmd->add_option("--preset", opt.preset, "model preset (photonbox)");
    cmd->add_option("--n-max", opt.n_max, "photon-number truncation");
    cmd->add_option("--theta", opt.theta, "per-photon atomic phase");
    cmd->add_option("--phi0", [&opt](const CLI::results_t& res) {
      double v;
      if (!CLI::detail::lexical_cast(res[0], v)) return false;
      opt.phi0 = v;
      return true;
    }, "interferometer offset (default: pi/4 - target*theta)");
    cmd->add_option("--target", opt.target, "goal photon number");
    cmd->add_option("--epsilon", opt.epsilon, "quadratic penalty weight");
    cmd->add_option("--u-bound", opt.u_bound, "control amplitude bound");
    cmd->add_option("--init-alpha", opt.init_alpha, "initial coherent displacement");
    cmd->add_option("--out", opt.out, "output directory");
  };

  CLI::App* validate = app.add_subcommand("validate", "check every stabilization hypothesis");
  add_common(validate);
  validate->add_option("--kraus", opt.kraus_path, "validate a Kraus-operator JSON file");

  CLI::App* synthesize = app.add_subcommand("synthesize", "solve for the Lyapunov weights");
  add_common(synthesize);
  synthesize->add_option("--controller", opt.controller, "exact | quadratic");

  CLI::App* simulate = app.add_subcommand("simulate", "run a seeded trajectory ensemble");
  add_common(simulate);
  simulate->add_option("--mode", opt.mode, "open | closed");
  simulate->add_option("--controller", opt.controller, "exact | quadratic");
  simulate->add_option("--trajectories", opt.trajectories, "number of trajectories");
  simulate->add_option("--steps", opt.steps, "steps per trajectory");
  simulate->add_option("--seed", opt.seed, "base seed");
  simulate->add_option("--threads", opt.threads, "worker threads");

  CLI::App* report = app.add_subcommand("report", "render a persisted summary.json");
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* cmd = app.get_subcommands().front();
    if (!opt.config_path.empty()) apply_config_file(opt, *cmd);
    if (cmd == validate) return run_validate(opt);
    if (cmd == synthesize) return run_synthesize(opt);
    if (cmd == simulate) return run_simulate(opt);
    return run_report(opt);
  } catch (const qnd::HypothesisViolation& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
