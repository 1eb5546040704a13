#pragma once

#include <Eigen/Dense>

#include "qnd/tolerances.hpp"

namespace qnd {

/// Density operator: Hermitian, unit-trace, positive semidefinite d x d
/// complex matrix. Immutable after construction.
class DensityMatrix {
 public:
  /// Validating constructor. Symmetrizes ((m+m^dag)/2) and renormalizes the
  /// trace after checking the raw input against `tol`; throws NotHermitian /
  /// NotUnitTrace / NotPositive naming the violated invariant and magnitude.
  static DensityMatrix from_matrix(const Eigen::MatrixXcd& m, const Tolerances& tol = {});

  /// |n><n| in dimension d.
  static DensityMatrix basis_projector(Eigen::Index dim, Eigen::Index n);

  /// I/d.
  static DensityMatrix maximally_mixed(Eigen::Index dim);

  /// Numerical hygiene path for states produced by the dynamics themselves
  /// (collapse, unitary conjugation): re-Hermitize and renormalize only.
  /// Positivity is preserved by those maps, so no eigenvalue check here.
  static DensityMatrix repair(const Eigen::MatrixXcd& m);

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return m_; }

  /// Diagonal <n|rho|n> as a real vector.
  Eigen::VectorXd populations() const { return m_.diagonal().real(); }
  double population(Eigen::Index n) const { return m_(n, n).real(); }

  double purity() const { return (m_ * m_).trace().real(); }

  /// Trace distance (1/2)||rho - other||_1.
  double trace_distance(const DensityMatrix& other) const;

 private:
  explicit DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {}
  Eigen::MatrixXcd m_;
};

inline Eigen::VectorXd populations(const DensityMatrix& rho) { return rho.populations(); }

}  // namespace qnd
