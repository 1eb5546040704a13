#include "qnd/openloop.hpp"

#include <sstream>

#include "qnd/errors.hpp"

namespace qnd {

std::pair<MeasurementOutcome, DensityMatrix> step_open(const DensityMatrix& rho, const KrausSet& k,
                                                       RngStream& rng, const Tolerances& tol) {
  MeasurementOutcome mu = sample_outcome(k, rho, rng);
  DensityMatrix next = collapse(k, mu.index, rho, tol);
  return {mu, std::move(next)};
}

double sublyapunov_V(const DensityMatrix& rho) {
  return 0.5 * rho.populations().squaredNorm();
}

double Q_increment(const DensityMatrix& rho, const KrausSet& k, const Tolerances& tol) {
  const Eigen::VectorXd p = outcome_probabilities(k, rho);
  const Eigen::VectorXd pop = rho.populations();
  const Eigen::Index m = k.count();
  const Eigen::Index d = k.dim();
  const double floor2 = tol.p_floor * tol.p_floor;
  double q = 0.0;
  for (Eigen::Index mu = 0; mu < m; ++mu) {
    for (Eigen::Index nu = 0; nu < m; ++nu) {
      const double pp = p(mu) * p(nu);
      if (pp <= floor2) continue;  // continuity extension: term -> 0
      for (Eigen::Index n = 0; n < d; ++n) {
        const double diff =
            k.weight(mu, n) * pop(n) / p(mu) - k.weight(nu, n) * pop(n) / p(nu);
        q += 0.25 * pp * diff * diff;
      }
    }
  }
  return q;
}

double martingale_residual(const DensityMatrix& rho, const KrausSet& k, Eigen::Index n,
                           const Tolerances& tol) {
  const Eigen::VectorXd p = outcome_probabilities(k, rho);
  double acc = 0.0;
  for (Eigen::Index mu = 0; mu < k.count(); ++mu) {
    if (p(mu) <= tol.p_floor) continue;
    // <n|M_mu(rho)|n> = |c_{mu,n}|^2 <n|rho|n> / p_mu
    acc += k.weight(mu, n) * rho.population(n);
  }
  return acc - rho.population(n);
}

TrajectoryRecord run_open_trajectory(const DensityMatrix& rho0, const KrausSet& k, int max_steps,
                                     const ConvergenceCriterion& crit, std::uint64_t seed,
                                     const Tolerances& tol) {
  TrajectoryRecord rec;
  rec.seed = seed;
  RngStream rng(seed);
  DensityMatrix rho = rho0;

  Eigen::Index streak_index = -1;
  int streak_len = 0;
  int streak_start = 0;
  // Observation 0 is the initial state: a trajectory starting at a fixed
  // point converges at step 0.
  auto observe = [&](const Eigen::VectorXd& pops, int obs_index) {
    Eigen::Index arg = 0;
    const double top = pops.maxCoeff(&arg);
    if (top >= crit.population_threshold) {
      if (streak_len == 0 || arg != streak_index) {
        streak_index = arg;
        streak_len = 1;
        streak_start = obs_index;
      } else {
        ++streak_len;
      }
    } else {
      streak_len = 0;
      streak_index = -1;
    }
    if (streak_len >= crit.patience && !rec.converged_to) {
      rec.converged_to = streak_index;
      rec.converged_at = streak_start;
    }
  };

  observe(rho.populations(), 0);
  for (int step = 0; step < max_steps && !rec.converged_to; ++step) {
    auto [mu, next] = step_open(rho, k, rng, tol);
    rho = std::move(next);
    rec.steps.push_back({step, static_cast<int>(mu.index), 0.0, rho.populations()});
    observe(rho.populations(), step + 1);
  }
  return rec;
}

ConvergenceEstimate estimate_convergence_probs(const std::vector<TrajectoryRecord>& records,
                                               Eigen::Index dim) {
  std::vector<std::uint64_t> bad;
  for (const auto& r : records) {
    if (!r.converged_to) bad.push_back(r.seed);
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << bad.size() << " unconverged trajectories, seeds:";
    for (std::size_t i = 0; i < bad.size() && i < 16; ++i) os << ' ' << bad[i];
    if (bad.size() > 16) os << " ...";
    throw UnconvergedTrajectories(os.str());
  }
  const int n = static_cast<int>(records.size());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(dim);
  for (const auto& r : records) counts(*r.converged_to) += 1.0;
  ConvergenceEstimate est;
  est.p_hat = counts / static_cast<double>(n);
  est.std_err = (est.p_hat.array() * (1.0 - est.p_hat.array()) / static_cast<double>(n))
                    .sqrt()
                    .matrix();
  est.sample_count = n;
  return est;
}

}  // namespace qnd
