#include <benchmark/benchmark.h>

#include <cmath>

#include "qnd/ensemble.hpp"

using namespace qnd;

namespace {

const PhotonBoxParams& params() {
  static const PhotonBoxParams p = PhotonBoxParams::defaults();
  return p;
}

void bm_outcome_probabilities(benchmark::State& state) {
  const KrausSet k = photonbox_kraus(params());
  const DensityMatrix rho = coherent_init(10, std::sqrt(3.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(outcome_probabilities(k, rho));
  }
}
BENCHMARK(bm_outcome_probabilities);

void bm_collapse(benchmark::State& state) {
  const KrausSet k = photonbox_kraus(params());
  const DensityMatrix rho = coherent_init(10, std::sqrt(3.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(collapse(k, 0, rho));
  }
}
BENCHMARK(bm_collapse);

void bm_q_increment(benchmark::State& state) {
  const KrausSet k = photonbox_kraus(params());
  const DensityMatrix rho = coherent_init(10, std::sqrt(3.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Q_increment(rho, k));
  }
}
BENCHMARK(bm_q_increment);

void bm_propagator_fresh(benchmark::State& state) {
  const PropagatorCache cache{displacement_hamiltonian(10)};
  double u = 0.001;
  for (auto _ : state) {
    u += 1e-9;  // never repeats: exercises the eigenbasis reconstruction
    benchmark::DoNotOptimize(cache.at(u));
  }
}
BENCHMARK(bm_propagator_fresh);

void bm_u_derivatives(benchmark::State& state) {
  const ClosedLoopContext ctx = photonbox_context(params(), ControlMode::Quadratic);
  const DensityMatrix rho = coherent_init(10, std::sqrt(3.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(u_derivatives(ctx, rho));
  }
}
BENCHMARK(bm_u_derivatives);

void bm_step_closed(benchmark::State& state) {
  const ControlMode mode = state.range(0) == 0 ? ControlMode::Quadratic : ControlMode::Exact;
  const ClosedLoopContext ctx = photonbox_context(params(), mode);
  const DensityMatrix rho0 = coherent_init(10, std::sqrt(3.0));
  RngStream rng(1);
  DensityMatrix rho = rho0;
  int steps = 0;
  for (auto _ : state) {
    auto [mu, u, next] = step_closed(rho, ctx, rng);
    benchmark::DoNotOptimize(u);
    rho = next;
    if (++steps % 200 == 0) rho = rho0;  // keep the state off the fixed point
  }
}
BENCHMARK(bm_step_closed)->Arg(0)->Arg(1)->ArgNames({"exact"});

void bm_synthesize_weights(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  const HermitianOperator h = displacement_hamiltonian(n_max);
  const Eigen::VectorXd gaps = Eigen::VectorXd::Ones(n_max + 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize_weights(h, gaps, 3, 1.0 / (4.0 * n_max + 2.0)));
  }
}
BENCHMARK(bm_synthesize_weights)->Arg(10)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
