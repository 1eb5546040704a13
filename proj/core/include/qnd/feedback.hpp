#pragma once

#include <cmath>
#include <tuple>

#include "qnd/errors.hpp"
#include "qnd/kraus.hpp"
#include "qnd/lyapunov.hpp"
#include "qnd/operators.hpp"

namespace qnd {

enum class ControlMode { Exact, Quadratic };

/// Controlled unitary evolution: Hamiltonian, control bound, controller mode,
/// and the cached eigendecomposition of H shared by all u evaluations.
class ControlModel {
 public:
  ControlModel(HermitianOperator h, double u_bound, ControlMode mode)
      : hamiltonian_(std::move(h)), u_bound_(u_bound), mode_(mode), cache_(hamiltonian_) {
    if (!(u_bound > 0.0) || !std::isfinite(u_bound)) {
      throw ConfigError("control bound must be finite and positive");
    }
  }

  const HermitianOperator& hamiltonian() const { return hamiltonian_; }
  double u_bound() const { return u_bound_; }
  ControlMode mode() const { return mode_; }
  const PropagatorCache& cache() const { return cache_; }

 private:
  HermitianOperator hamiltonian_;
  double u_bound_;
  ControlMode mode_;
  PropagatorCache cache_;
};

/// Everything one closed-loop trajectory needs; immutable and shareable
/// across workers.
class ClosedLoopContext {
 public:
  ClosedLoopContext(KrausSet kraus, ControlModel control, LyapunovWeights weights,
                    Tolerances tol = {});

  const KrausSet& kraus() const { return kraus_; }
  const ControlModel& control() const { return control_; }
  const LyapunovWeights& weights() const { return weights_; }
  const Tolerances& tolerances() const { return tol_; }

  /// Gauge-canonical sigma used by every control computation: differences to
  /// the target entry, snapped to a 2^-32 grid. The control law depends on
  /// sigma only through such differences, so two weight vectors that differ
  /// by a constant shift map to bit-identical canonical forms and therefore
  /// bit-identical control sequences.
  const Eigen::VectorXd& canonical_sigma() const { return canonical_sigma_; }

  /// W_eps evaluated with the canonical sigma (gauge-fixed scale).
  double control_objective(const DensityMatrix& rho) const;
  double control_objective(const Eigen::VectorXd& populations) const;

 private:
  KrausSet kraus_;
  ControlModel control_;
  LyapunovWeights weights_;
  Tolerances tol_;
  Eigen::VectorXd canonical_sigma_;
};

/// First and second u-derivatives of W_eps(U_u(rho)) at u = 0, from
/// commutator traces only (no matrix exponentials).
std::pair<double, double> u_derivatives(const ClosedLoopContext& ctx, const DensityMatrix& rho);

/// Maximizer of the parabola W + D1 u + (D2/2) u^2 over [-u_bound, u_bound].
/// Convex/flat parabolas go to the endpoint in the direction of D1, with the
/// D1 = 0 tie broken deterministically to +u_bound.
double argmax_quadratic(double d1, double d2, double u_bound);

/// Grid scan (33 points) over [-u_bound, u_bound] of the exact objective,
/// then golden-section refinement around the best grid point down to
/// interval width tol_u.
double argmax_exact(const ClosedLoopContext& ctx, const DensityMatrix& rho, double tol_u = 1e-6);

/// Dispatches on the configured controller mode.
double feedback(const ClosedLoopContext& ctx, const DensityMatrix& rho_half);

/// One closed-loop step: sample mu, collapse, compute u on the
/// post-measurement state, apply U_u.
std::tuple<MeasurementOutcome, double, DensityMatrix> step_closed(const DensityMatrix& rho,
                                                                  const ClosedLoopContext& ctx,
                                                                  RngStream& rng);

/// Proof diagnostics: Q1 is the expected measurement gain of W_eps, Q2 the
/// expected control gain on top of it. Q2's inner max uses the configured
/// controller mode. Q1 + Q2 is the exact one-step expected increment.
std::pair<double, double> q1_q2_diagnostics(const DensityMatrix& rho,
                                            const ClosedLoopContext& ctx);

}  // namespace qnd
