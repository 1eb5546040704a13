#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qnd/ensemble.hpp"
#include "qnd/errors.hpp"

using namespace qnd;
namespace fs = std::filesystem;

namespace {

SimulationConfig small_config() {
  SimulationConfig cfg;
  cfg.trajectories = 8;
  cfg.steps = 30;
  cfg.base_seed = 17;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("ensemble summary bookkeeping on a small closed-loop run") {
  const SimulationConfig cfg = small_config();
  const EnsembleResult res = run_ensemble(cfg);
  CHECK(res.records.size() == 8);
  CHECK(res.summary.trajectories == 8);
  CHECK(res.summary.steps == 30);
  CHECK(res.summary.mean_fidelity.size() == 31);
  CHECK(res.summary.final_fidelity.size() == 8);
  CHECK(res.summary.convergence_steps.size() == 8);
  CHECK(res.summary.failed_seeds.empty());
  // All trajectories carry the full number of steps (no early stop).
  for (const auto& rec : res.records) CHECK(rec.steps.size() == 30);
  // Entry 0 of the fidelity curve is the shared initial state.
  const DensityMatrix rho0 = coherent_init(cfg.params.n_max, cfg.init_alpha);
  CHECK(res.summary.mean_fidelity(0) == doctest::Approx(rho0.population(3)).epsilon(1e-14));
  CHECK(res.summary.wall_seconds >= 0.0);
}

TEST_CASE("thread count does not change any result byte") {
  SimulationConfig cfg = small_config();
  TempDir dir_a("qnd_ens_a"), dir_b("qnd_ens_b");

  cfg.threads = 1;
  cfg.output_dir = dir_a.path.string();
  run_ensemble(cfg);

  cfg.threads = 3;
  cfg.output_dir = dir_b.path.string();
  run_ensemble(cfg);

  CHECK(slurp(dir_a.path / "trajectories.csv") == slurp(dir_b.path / "trajectories.csv"));
  CHECK(slurp(dir_a.path / "fidelity_curve.csv") == slurp(dir_b.path / "fidelity_curve.csv"));
}

TEST_CASE("repeated runs with the same seed are identical") {
  const SimulationConfig cfg = small_config();
  const EnsembleResult a = run_ensemble(cfg);
  const EnsembleResult b = run_ensemble(cfg);
  for (size_t t = 0; t < a.records.size(); ++t) {
    REQUIRE(a.records[t].steps.size() == b.records[t].steps.size());
    for (size_t s = 0; s < a.records[t].steps.size(); ++s) {
      CHECK(a.records[t].steps[s].outcome == b.records[t].steps[s].outcome);
      CHECK(a.records[t].steps[s].control == b.records[t].steps[s].control);
    }
  }
}

TEST_CASE("trajectories.csv schema and determinism of formatting") {
  SimulationConfig cfg = small_config();
  cfg.trajectories = 2;
  cfg.steps = 3;
  TempDir dir("qnd_ens_schema");
  cfg.output_dir = dir.path.string();
  run_ensemble(cfg);

  std::ifstream in(dir.path / "trajectories.csv");
  std::string header;
  std::getline(in, header);
  std::string expected = "trajectory_id,step,outcome,u";
  for (int n = 0; n <= 10; ++n) expected += ",pop_" + std::to_string(n);
  CHECK(header == expected);

  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
    const size_t commas = static_cast<size_t>(std::count(line.begin(), line.end(), ','));
    CHECK(commas == 14);
  }
  CHECK(rows == 2 * 3);
}

TEST_CASE("fidelity curve file has one row per post-measurement step") {
  SimulationConfig cfg = small_config();
  cfg.steps = 5;
  TempDir dir("qnd_ens_fid");
  cfg.output_dir = dir.path.string();
  run_ensemble(cfg);

  std::ifstream in(dir.path / "fidelity_curve.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "step,mean,p5,p95");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream ss(line);
    std::string step_s, mean_s, p5_s, p95_s;
    std::getline(ss, step_s, ',');
    std::getline(ss, mean_s, ',');
    std::getline(ss, p5_s, ',');
    std::getline(ss, p95_s, ',');
    const double mean = std::stod(mean_s), p5 = std::stod(p5_s), p95 = std::stod(p95_s);
    CHECK(p5 <= mean + 1e-12);
    CHECK(mean <= p95 + 1e-12);
    CHECK(p5 >= -1e-12);
    CHECK(p95 <= 1.0 + 1e-12);
  }
  CHECK(rows == 5);
}

TEST_CASE("summary.json echoes the configuration and the statistics") {
  SimulationConfig cfg = small_config();
  cfg.steps = 60;
  TempDir dir("qnd_ens_json");
  cfg.output_dir = dir.path.string();
  const EnsembleResult res = run_ensemble(cfg);

  const std::string text = slurp(dir.path / "summary.json");
  CHECK(text.find("\"trajectories\": 8") != std::string::npos);
  CHECK(text.find("\"steps\": 60") != std::string::npos);
  CHECK(text.find("\"base_seed\": 17") != std::string::npos);
  CHECK(text.find("\"mode\": \"closed\"") != std::string::npos);
  CHECK(text.find("\"controller\": \"quadratic\"") != std::string::npos);
  CHECK(text.find("mean_fidelity") != std::string::npos);
  CHECK(text.find("final_fidelity") != std::string::npos);
  CHECK(res.summary.converged_count >= 0);
}

TEST_CASE("sigma.csv lists one weight per basis state") {
  const ClosedLoopContext ctx = photonbox_context(PhotonBoxParams::defaults(), ControlMode::Exact);
  TempDir dir("qnd_ens_sigma");
  const fs::path path = dir.path / "sigma.csv";
  write_sigma_csv(path.string(), ctx.weights());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,sigma");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 11);
}

TEST_CASE("open-loop ensembles run without any control action") {
  SimulationConfig cfg = small_config();
  cfg.mode = LoopMode::Open;
  cfg.steps = 120;
  cfg.trajectories = 20;
  const EnsembleResult res = run_ensemble(cfg);
  for (const auto& rec : res.records) {
    for (const auto& s : rec.steps) CHECK(s.control == 0.0);
  }
  // Statistics exist once every trajectory converged.
  if (res.summary.converged_count == 20) {
    CHECK(res.summary.p_hat.size() == 11);
    CHECK(res.summary.p_hat.sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("model validation passes on the default preset") {
  const ModelReport report = validate_model(small_config());
  CHECK(report.all_pass());
  CHECK(report.checks.size() == 5);
  bool saw_epsilon = false;
  for (const auto& c : report.checks) {
    CHECK(c.pass);
    if (c.name == "epsilon-bound") saw_epsilon = true;
  }
  CHECK(saw_epsilon);
}

TEST_CASE("model validation reports a degenerate measurement phase") {
  SimulationConfig cfg = small_config();
  cfg.params.theta = 0.0;
  const ModelReport report = validate_model(cfg);
  CHECK(!report.all_pass());
  bool kraus_failed = false;
  for (const auto& c : report.checks) {
    if (c.name == "kraus-assumptions" && !c.pass) kraus_failed = true;
  }
  CHECK(kraus_failed);
}

TEST_CASE("model validation rejects an oversized epsilon") {
  SimulationConfig cfg = small_config();
  cfg.params.epsilon = 0.05;
  const ModelReport report = validate_model(cfg);
  CHECK(!report.all_pass());
  bool eps_failed = false;
  for (const auto& c : report.checks) {
    if (c.name == "epsilon-bound" && !c.pass) eps_failed = true;
  }
  CHECK(eps_failed);
}

TEST_CASE("report rendering summarizes the run and rejects empty input") {
  SimulationConfig cfg = small_config();
  cfg.steps = 60;
  const EnsembleResult res = run_ensemble(cfg);
  const std::string text = render_report(res.summary, 3);
  CHECK(text.find("trajectories") != std::string::npos);
  CHECK(!text.empty());

  CHECK_THROWS_AS(render_report(EnsembleSummary{}, 3), ConfigError);
}
