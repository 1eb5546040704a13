#pragma once

#include <Eigen/Dense>

#include "qnd/density.hpp"
#include "qnd/tolerances.hpp"

namespace qnd {

/// Hermitian generator of the controlled unitary U_u = exp(-i u H).
class HermitianOperator {
 public:
  static HermitianOperator from_matrix(const Eigen::MatrixXcd& m, const Tolerances& tol = {});

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return m_; }

 private:
  explicit HermitianOperator(Eigen::MatrixXcd m) : m_(std::move(m)) {}
  Eigen::MatrixXcd m_;
};

struct UnitaryPropagator {
  Eigen::MatrixXcd matrix;
  double control_value = 0.0;

  Eigen::Index dim() const { return matrix.rows(); }
};

/// Eigendecomposition of H, cached so that U_u for many values of u costs two
/// matrix products each instead of a fresh decomposition. The feedback line
/// search evaluates many u per step.
class PropagatorCache {
 public:
  explicit PropagatorCache(const HermitianOperator& h);

  /// U_u = V exp(-i u Lambda) V^dag. Unitary up to roundoff by construction.
  UnitaryPropagator at(double u) const;

  Eigen::Index dim() const { return eigenvectors_.rows(); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

 private:
  Eigen::MatrixXcd eigenvectors_;
  Eigen::VectorXd eigenvalues_;
};

/// One-shot U_u = exp(-i u H).
UnitaryPropagator propagator(const HermitianOperator& h, double u);

/// rho -> U rho U^dag, re-validated through the hygiene path.
DensityMatrix apply_unitary(const UnitaryPropagator& u, const DensityMatrix& rho);

/// AB - BA.
Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Quadratic approximation of U_u rho U_u^dag:
/// rho - i u [H, rho] - (u^2/2) [H, [H, rho]].
/// Not necessarily a valid density matrix; used inside scalar evaluations.
Eigen::MatrixXcd bch_second_order(const DensityMatrix& rho, const HermitianOperator& h, double u);

}  // namespace qnd
