#include "qnd/photonbox.hpp"

#include <sstream>

#include "qnd/errors.hpp"

namespace qnd {

Eigen::MatrixXcd annihilation(int n_max) {
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  const Eigen::Index d = n_max + 1;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index n = 0; n + 1 < d; ++n) {
    a(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
  }
  return a;
}

HermitianOperator number_operator(int n_max) {
  const Eigen::Index d = n_max + 1;
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) n(i, i) = static_cast<double>(i);
  return HermitianOperator::from_matrix(n);
}

KrausSet photonbox_kraus(const PhotonBoxParams& params, const Tolerances& tol) {
  const Eigen::Index d = params.n_max + 1;
  Eigen::MatrixXcd mg = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd me = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index n = 0; n < d; ++n) {
    const double angle = params.phi0 + params.theta * static_cast<double>(n);
    mg(n, n) = std::cos(angle);
    me(n, n) = std::sin(angle);
  }
  KrausValidation v = validate_kraus({mg, me}, tol);
  if (!v.ok()) {
    throw HypothesisViolation("photon-box Kraus pair rejected: " + v.describe());
  }
  return *v.set;
}

HermitianOperator displacement_hamiltonian(int n_max) {
  const Eigen::MatrixXcd a = annihilation(n_max);
  const std::complex<double> i_unit(0.0, 1.0);
  return HermitianOperator::from_matrix(i_unit * (a.adjoint() - a));
}

DensityMatrix coherent_init(int n_max, double alpha) {
  const HermitianOperator h = displacement_hamiltonian(n_max);
  const DensityMatrix vacuum = DensityMatrix::basis_projector(n_max + 1, 0);
  return apply_unitary(propagator(h, alpha), vacuum);
}

Eigen::MatrixXd photonbox_laplacian_oracle(int n_max) {
  const Eigen::Index d = n_max + 1;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d, d);
  // Closed-form tri-diagonal entries, integer arithmetic. Diagonal 4n+2
  // except the truncated last row, where the upward coupling is cut and the
  // diagonal drops to 2 n_max.
  for (Eigen::Index n = 0; n < d; ++n) {
    r(n, n) = (n + 1 < d) ? static_cast<double>(4 * n + 2) : static_cast<double>(2 * n_max);
    if (n + 1 < d) {
      r(n, n + 1) = static_cast<double>(-2 * (n + 1));
      r(n + 1, n) = static_cast<double>(-2 * (n + 1));
    }
  }
  return r;
}

double photonbox_epsilon_bound(int n_max) {
  return 1.0 / (2.0 * n_max + 1.0);
}

ClosedLoopContext photonbox_context(const PhotonBoxParams& params, ControlMode mode,
                                    const Tolerances& tol) {
  if (params.target < 0 || params.target > params.n_max) {
    throw ConfigError("target photon number out of range");
  }
  const double bound = photonbox_epsilon_bound(params.n_max);
  if (!(params.epsilon > 0.0) || params.epsilon >= bound) {
    std::ostringstream os;
    os << "epsilon " << params.epsilon << " outside (0, " << bound
       << "), the uniform bound 1/(2 n_max + 1)";
    throw HypothesisViolation(os.str());
  }
  KrausSet kraus = photonbox_kraus(params, tol);
  HermitianOperator h = displacement_hamiltonian(params.n_max);
  Eigen::VectorXd gaps = params.lambda_gaps;
  if (gaps.size() == 0) gaps = Eigen::VectorXd::Ones(params.n_max + 1);
  if (gaps.size() != params.n_max + 1) {
    throw ConfigError("lambda gap vector length must be n_max + 1");
  }
  LyapunovWeights weights = synthesize_weights(h, gaps, params.target, params.epsilon, tol);
  ControlModel control(std::move(h), params.u_bound, mode);
  return ClosedLoopContext(std::move(kraus), std::move(control), std::move(weights), tol);
}

}  // namespace qnd
