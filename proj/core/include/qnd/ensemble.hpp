#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnd/openloop.hpp"
#include "qnd/photonbox.hpp"

namespace qnd {

enum class LoopMode { Open, Closed };

struct SimulationConfig {
  std::string preset = "photonbox";
  PhotonBoxParams params;
  LoopMode mode = LoopMode::Closed;
  ControlMode controller = ControlMode::Quadratic;
  int trajectories = 100;
  int steps = 200;
  std::uint64_t base_seed = 0;
  std::string output_dir;  // empty: no persistence
  int snapshot_every = 50;
  int threads = 1;
  double init_alpha = std::sqrt(3.0);  // coherent initial displacement
  ConvergenceCriterion convergence;
  Tolerances tol;
};

struct EnsembleSummary {
  int trajectories = 0;
  int steps = 0;
  std::uint64_t base_seed = 0;
  Eigen::VectorXd mean_fidelity;          // <target|rho_k|target> per step, length steps+1
  std::vector<double> final_fidelity;     // per trajectory
  Eigen::VectorXd p_hat;                  // convergence estimate (may be empty if none converged)
  Eigen::VectorXd std_err;
  std::vector<int> convergence_steps;     // -1 for unconverged
  int converged_count = 0;
  std::vector<std::uint64_t> failed_seeds;
  double wall_seconds = 0.0;
};

struct EnsembleResult {
  EnsembleSummary summary;
  std::vector<TrajectoryRecord> records;
};

/// Runs N trajectories of K steps on independent per-trajectory streams
/// (base_seed xor splitmix(id)). Results are reduced in trajectory order, so
/// output is identical for any worker count. When cfg.output_dir is set,
/// writes trajectories.csv, summary.json and fidelity_curve.csv.
EnsembleResult run_ensemble(const SimulationConfig& cfg);

struct HypothesisCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ModelReport {
  std::vector<HypothesisCheck> checks;
  bool all_pass() const;
};

/// Runs every stabilization hypothesis on the configured model: Kraus
/// validation, graph connectivity, epsilon bound, sigma residual and
/// strict-maximum property. Failures land in the report, not exceptions.
ModelReport validate_model(const SimulationConfig& cfg);

/// Deterministic CSV writers (schema documented in the README; golden-file
/// tested). Numbers are printed with %.17g so round-trips are exact.
void write_trajectories_csv(const std::string& path, const std::vector<TrajectoryRecord>& records,
                            Eigen::Index dim);
void write_fidelity_curve_csv(const std::string& path, const std::vector<TrajectoryRecord>& records,
                              Eigen::Index target, int steps);
void write_summary_json(const std::string& path, const SimulationConfig& cfg,
                        const EnsembleSummary& summary);
void write_sigma_csv(const std::string& path, const LyapunovWeights& weights);

/// Human-readable report of a persisted or in-memory ensemble summary.
std::string render_report(const EnsembleSummary& summary, Eigen::Index target);

}  // namespace qnd
