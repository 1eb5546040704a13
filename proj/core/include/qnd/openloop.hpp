#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qnd/density.hpp"
#include "qnd/kraus.hpp"

namespace qnd {

struct StepLog {
  int step = 0;
  int outcome = 0;
  double control = 0.0;
  Eigen::VectorXd populations;
};

struct TrajectoryRecord {
  std::vector<StepLog> steps;
  std::uint64_t seed = 0;
  std::optional<Eigen::Index> converged_to;
  std::optional<int> converged_at;  // first step of the qualifying streak
};

/// Empirical proxy for trajectory convergence: a population must stay above
/// `population_threshold` for `patience` consecutive steps.
struct ConvergenceCriterion {
  double population_threshold = 0.999;
  int patience = 10;
};

/// One open-loop step: sample an outcome, collapse.
std::pair<MeasurementOutcome, DensityMatrix> step_open(const DensityMatrix& rho, const KrausSet& k,
                                                       RngStream& rng,
                                                       const Tolerances& tol = {});

/// V(rho) = sum_n <n|rho|n>^2 / 2. Sub-martingale of the open-loop chain.
double sublyapunov_V(const DensityMatrix& rho);

/// Exact one-step conditional increment E[V(rho')|rho] - V(rho), evaluated in
/// closed form from the coefficient table. Nonnegative; zero exactly on the
/// basis projectors.
double Q_increment(const DensityMatrix& rho, const KrausSet& k, const Tolerances& tol = {});

/// sum_mu p_mu <n|M_mu(rho)|n> - <n|rho|n>; vanishes for valid QND sets.
double martingale_residual(const DensityMatrix& rho, const KrausSet& k, Eigen::Index n,
                           const Tolerances& tol = {});

TrajectoryRecord run_open_trajectory(const DensityMatrix& rho0, const KrausSet& k, int max_steps,
                                     const ConvergenceCriterion& crit, std::uint64_t seed,
                                     const Tolerances& tol = {});

struct ConvergenceEstimate {
  Eigen::VectorXd p_hat;
  Eigen::VectorXd std_err;  // binomial: sqrt(p(1-p)/N)
  int sample_count = 0;
};

/// Empirical convergence frequencies over an ensemble of converged records.
/// Throws UnconvergedTrajectories (listing offending seeds) if any record has
/// no converged_to.
ConvergenceEstimate estimate_convergence_probs(const std::vector<TrajectoryRecord>& records,
                                               Eigen::Index dim);

}  // namespace qnd
