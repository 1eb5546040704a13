#include "qnd/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qnd/errors.hpp"

namespace qnd {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class ConvergenceTracker {
 public:
  explicit ConvergenceTracker(const ConvergenceCriterion& crit) : crit_(crit) {}

  void observe(const Eigen::VectorXd& pops, int obs_index, TrajectoryRecord& rec) {
    Eigen::Index arg = 0;
    const double top = pops.maxCoeff(&arg);
    if (top >= crit_.population_threshold) {
      if (len_ == 0 || arg != index_) {
        index_ = arg;
        len_ = 1;
        start_ = obs_index;
      } else {
        ++len_;
      }
    } else {
      len_ = 0;
      index_ = -1;
    }
    if (len_ >= crit_.patience && !rec.converged_to) {
      rec.converged_to = index_;
      rec.converged_at = start_;
    }
  }

 private:
  ConvergenceCriterion crit_;
  Eigen::Index index_ = -1;
  int len_ = 0;
  int start_ = 0;
};

TrajectoryRecord run_one(const SimulationConfig& cfg, const ClosedLoopContext* ctx,
                         const KrausSet& kraus, const DensityMatrix& rho0,
                         std::uint64_t trajectory_id) {
  TrajectoryRecord rec;
  rec.seed = cfg.base_seed ^ splitmix64(trajectory_id);
  RngStream rng(rec.seed);
  DensityMatrix rho = rho0;
  ConvergenceTracker tracker(cfg.convergence);
  tracker.observe(rho.populations(), 0, rec);
  rec.steps.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    double u = 0.0;
    int outcome = 0;
    if (cfg.mode == LoopMode::Closed) {
      auto [mu, control, next] = step_closed(rho, *ctx, rng);
      outcome = static_cast<int>(mu.index);
      u = control;
      rho = std::move(next);
    } else {
      auto [mu, next] = step_open(rho, kraus, rng, cfg.tol);
      outcome = static_cast<int>(mu.index);
      rho = std::move(next);
    }
    rec.steps.push_back({step, outcome, u, rho.populations()});
    tracker.observe(rho.populations(), step + 1, rec);
  }
  return rec;
}

}  // namespace

bool ModelReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const HypothesisCheck& c) { return c.pass; });
}

EnsembleResult run_ensemble(const SimulationConfig& cfg) {
  if (cfg.trajectories < 1 || cfg.steps < 1) {
    throw ConfigError("trajectories and steps must both be >= 1");
  }
  const auto t0 = std::chrono::steady_clock::now();

  KrausSet kraus = photonbox_kraus(cfg.params, cfg.tol);
  std::unique_ptr<ClosedLoopContext> ctx;
  if (cfg.mode == LoopMode::Closed) {
    ctx = std::make_unique<ClosedLoopContext>(photonbox_context(cfg.params, cfg.controller, cfg.tol));
  }
  const DensityMatrix rho0 = coherent_init(cfg.params.n_max, cfg.init_alpha);
  const Eigen::Index d = rho0.dim();
  const Eigen::Index target = cfg.params.target;

  EnsembleResult out;
  out.records.resize(cfg.trajectories);
  std::vector<std::string> failures(cfg.trajectories);

  const int workers = std::max(1, cfg.threads);
  std::atomic<int> next_id{0};
  auto work = [&] {
    for (;;) {
      const int id = next_id.fetch_add(1);
      if (id >= cfg.trajectories) break;
      try {
        out.records[id] = run_one(cfg, ctx.get(), kraus, rho0, static_cast<std::uint64_t>(id));
      } catch (const std::exception& e) {
        out.records[id].seed = cfg.base_seed ^ splitmix64(static_cast<std::uint64_t>(id));
        failures[id] = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  EnsembleSummary& s = out.summary;
  s.trajectories = cfg.trajectories;
  s.steps = cfg.steps;
  s.base_seed = cfg.base_seed;
  s.mean_fidelity = Eigen::VectorXd::Zero(cfg.steps + 1);
  int ok_count = 0;
  for (int id = 0; id < cfg.trajectories; ++id) {
    const TrajectoryRecord& r = out.records[id];
    if (!failures[id].empty()) {
      s.failed_seeds.push_back(r.seed);
      s.convergence_steps.push_back(-1);
      s.final_fidelity.push_back(0.0);
      continue;
    }
    ++ok_count;
    s.mean_fidelity(0) += rho0.population(target);
    for (int k = 0; k < cfg.steps; ++k) {
      s.mean_fidelity(k + 1) += r.steps[k].populations(target);
    }
    s.final_fidelity.push_back(r.steps.back().populations(target));
    s.convergence_steps.push_back(r.converged_to ? *r.converged_at : -1);
    if (r.converged_to) ++s.converged_count;
  }
  if (ok_count > 0) s.mean_fidelity /= static_cast<double>(ok_count);

  if (s.converged_count == cfg.trajectories && s.failed_seeds.empty()) {
    ConvergenceEstimate est = estimate_convergence_probs(out.records, d);
    s.p_hat = est.p_hat;
    s.std_err = est.std_err;
  }
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path dir(cfg.output_dir);
    write_trajectories_csv((dir / "trajectories.csv").string(), out.records, d);
    write_fidelity_curve_csv((dir / "fidelity_curve.csv").string(), out.records, target, cfg.steps);
    write_summary_json((dir / "summary.json").string(), cfg, s);
  }
  return out;
}

ModelReport validate_model(const SimulationConfig& cfg) {
  ModelReport report;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    report.checks.push_back({name, pass, detail});
  };

  const PhotonBoxParams& p = cfg.params;
  KrausValidation kv;
  try {
    const Eigen::Index d = p.n_max + 1;
    Eigen::MatrixXcd mg = Eigen::MatrixXcd::Zero(d, d);
    Eigen::MatrixXcd me = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
      const double angle = p.phi0 + p.theta * static_cast<double>(n);
      mg(n, n) = std::cos(angle);
      me(n, n) = std::sin(angle);
    }
    kv = validate_kraus({mg, me}, cfg.tol);
    add("kraus-assumptions", kv.ok(), kv.describe());
  } catch (const std::exception& e) {
    add("kraus-assumptions", false, e.what());
  }

  try {
    HermitianOperator h = displacement_hamiltonian(p.n_max);
    const ConnectivityGraph g = connectivity_graph(h, cfg.tol.edge_tol);
    add("graph-connected", g.connected,
        g.connected ? "connectivity graph of H is connected" : "graph has multiple components");

    const double bound = photonbox_epsilon_bound(p.n_max);
    const bool eps_ok = p.epsilon > 0.0 && p.epsilon < bound;
    {
      std::ostringstream os;
      os << "epsilon = " << p.epsilon << ", uniform bound 1/(2 n_max + 1) = " << bound;
      if (p.target == p.n_max) os << " (warning: target at the truncation edge)";
      add("epsilon-bound", eps_ok, os.str());
    }

    if (g.connected) {
      Eigen::VectorXd gaps = p.lambda_gaps;
      if (gaps.size() == 0) gaps = Eigen::VectorXd::Ones(p.n_max + 1);
      const Eigen::MatrixXd r = laplacian(h);
      const Eigen::VectorXd sigma = solve_sigma(r, gaps, p.target, cfg.tol);
      const Eigen::VectorXd lambda = assemble_lambda(gaps, p.target);
      const double residual = (r * sigma + lambda).cwiseAbs().maxCoeff();
      {
        std::ostringstream os;
        os << "||R sigma + lambda||_inf = " << residual;
        add("sigma-residual", residual <= cfg.tol.sigma_residual, os.str());
      }
      bool strict_max = true;
      for (Eigen::Index n = 0; n < sigma.size(); ++n) {
        if (n != p.target && sigma(n) >= sigma(p.target)) strict_max = false;
      }
      add("sigma-strict-maximum", strict_max,
          strict_max ? "sigma has its unique maximum at the target"
                     : "sigma maximum is not at the target");
    }
  } catch (const std::exception& e) {
    add("lyapunov-synthesis", false, e.what());
  }
  return report;
}

void write_trajectories_csv(const std::string& path, const std::vector<TrajectoryRecord>& records,
                            Eigen::Index dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << "trajectory_id,step,outcome,u";
  for (Eigen::Index n = 0; n < dim; ++n) out << ",pop_" << n;
  out << "\n";
  for (std::size_t id = 0; id < records.size(); ++id) {
    for (const StepLog& s : records[id].steps) {
      out << id << ',' << s.step << ',' << s.outcome << ',' << fmt_double(s.control);
      for (Eigen::Index n = 0; n < dim; ++n) out << ',' << fmt_double(s.populations(n));
      out << "\n";
    }
  }
}

void write_fidelity_curve_csv(const std::string& path, const std::vector<TrajectoryRecord>& records,
                              Eigen::Index target, int steps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << "step,mean,p5,p95\n";
  // Step k rows summarize the post-step states; row 0 would be the shared
  // initial state and is omitted because trajectories.csv starts at step 0
  // as well.
  for (int k = 0; k < steps; ++k) {
    std::vector<double> vals;
    vals.reserve(records.size());
    for (const auto& r : records) {
      if (k < static_cast<int>(r.steps.size())) vals.push_back(r.steps[k].populations(target));
    }
    if (vals.empty()) continue;
    std::sort(vals.begin(), vals.end());
    const double mean =
        std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    auto pct = [&](double q) {
      const double pos = q * static_cast<double>(vals.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, vals.size() - 1);
      const double frac = pos - static_cast<double>(lo);
      return vals[lo] * (1.0 - frac) + vals[hi] * frac;
    };
    out << k << ',' << fmt_double(mean) << ',' << fmt_double(pct(0.05)) << ','
        << fmt_double(pct(0.95)) << "\n";
  }
}

void write_summary_json(const std::string& path, const SimulationConfig& cfg,
                        const EnsembleSummary& s) {
  nlohmann::json j;
  j["config"] = {
      {"preset", cfg.preset},
      {"mode", cfg.mode == LoopMode::Closed ? "closed" : "open"},
      {"controller", cfg.controller == ControlMode::Exact ? "exact" : "quadratic"},
      {"trajectories", cfg.trajectories},
      {"steps", cfg.steps},
      {"base_seed", cfg.base_seed},
      {"n_max", cfg.params.n_max},
      {"target", cfg.params.target},
      {"theta", cfg.params.theta},
      {"phi0", cfg.params.phi0},
      {"epsilon", cfg.params.epsilon},
      {"u_bound", cfg.params.u_bound},
      {"init_alpha", cfg.init_alpha},
  };
  j["mean_fidelity"] = std::vector<double>(s.mean_fidelity.data(),
                                           s.mean_fidelity.data() + s.mean_fidelity.size());
  j["final_fidelity"] = s.final_fidelity;
  j["convergence_steps"] = s.convergence_steps;
  j["converged_count"] = s.converged_count;
  if (s.p_hat.size() > 0) {
    j["p_hat"] = std::vector<double>(s.p_hat.data(), s.p_hat.data() + s.p_hat.size());
    j["std_err"] = std::vector<double>(s.std_err.data(), s.std_err.data() + s.std_err.size());
  }
  j["failed_seeds"] = s.failed_seeds;
  j["wall_seconds"] = s.wall_seconds;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_sigma_csv(const std::string& path, const LyapunovWeights& weights) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << "n,sigma\n";
  for (Eigen::Index n = 0; n < weights.sigma.size(); ++n) {
    out << n << ',' << fmt_double(weights.sigma(n)) << "\n";
  }
}

std::string render_report(const EnsembleSummary& s, Eigen::Index target) {
  if (s.trajectories == 0) throw ConfigError("empty ensemble");
  std::ostringstream os;
  os << "trajectories: " << s.trajectories << ", steps: " << s.steps
     << ", base seed: " << s.base_seed << "\n";
  os << "converged: " << s.converged_count << "/" << s.trajectories << "\n";
  os << "mean fidelity <" << target << "|rho|" << target
     << ">: start " << s.mean_fidelity(0) << ", end " << s.mean_fidelity(s.mean_fidelity.size() - 1)
     << "\n";
  if (s.p_hat.size() > 0) {
    os << "convergence probabilities (p_hat +- std_err):\n";
    for (Eigen::Index n = 0; n < s.p_hat.size(); ++n) {
      os << "  n=" << n << ": " << s.p_hat(n) << " +- " << s.std_err(n) << "\n";
    }
  }
  if (!s.failed_seeds.empty()) {
    os << "failed trajectories: " << s.failed_seeds.size() << "\n";
  }
  return os.str();
}

}  // namespace qnd
