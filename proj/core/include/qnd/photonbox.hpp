#pragma once

#include <cmath>

#include "qnd/feedback.hpp"

namespace qnd {

/// Photon-box case study: truncated cavity mode measured by dispersive atoms
/// (cos/sin Kraus pair) and displaced by a classical field injection.
/// Photon numbers are 0-indexed, n in {0, ..., n_max}, d = n_max + 1.
struct PhotonBoxParams {
  int n_max = 10;
  double theta = std::sqrt(2.0) / 5.0;
  double phi0 = M_PI / 4.0 - 3.0 * (std::sqrt(2.0) / 5.0);  // pi/4 - target*theta
  Eigen::Index target = 3;
  double epsilon = 1.0 / 42.0;  // 1/(4 n_max + 2)
  double u_bound = 0.1;
  Eigen::VectorXd lambda_gaps;  // defaults to all ones when empty

  static PhotonBoxParams defaults() { return PhotonBoxParams{}; }
};

/// Truncated annihilation operator: superdiagonal sqrt(1), ..., sqrt(n_max).
Eigen::MatrixXcd annihilation(int n_max);

/// N = a^dag a = diag(0, 1, ..., n_max).
HermitianOperator number_operator(int n_max);

/// M_g = cos(phi0 + theta N), M_e = sin(phi0 + theta N). Routed through
/// validate_kraus; throws HypothesisViolation when distinguishability fails
/// (degenerate theta/phi0/n_max combinations).
KrausSet photonbox_kraus(const PhotonBoxParams& params, const Tolerances& tol = {});

/// H = i (a^dag - a), the displacement generator. Tri-diagonal.
HermitianOperator displacement_hamiltonian(int n_max);

/// Coherent state U_alpha(|0><0|), built with the exact truncated propagator
/// so its truncation behavior matches the simulated dynamics.
DensityMatrix coherent_init(int n_max, double alpha);

/// Closed-form tri-diagonal Laplacian: diagonal 4n+2, upper -2n, lower
/// -2n-2; the last two rows carry the truncation distortion and are computed
/// from the generic formula.
Eigen::MatrixXd photonbox_laplacian_oracle(int n_max);

/// Uniform epsilon bound 1/(2 n_max + 1), the conservative reference
/// the preset enforces (the exact per-n bound under truncation is looser).
double photonbox_epsilon_bound(int n_max);

/// Materializes the preset into a full closed-loop context. Throws
/// HypothesisViolation when epsilon >= 1/(2 n_max + 1) or distinguishability
/// fails. target == n_max is allowed but warned against in the message of
/// the validation report, not here.
ClosedLoopContext photonbox_context(const PhotonBoxParams& params, ControlMode mode,
                                    const Tolerances& tol = {});

}  // namespace qnd
