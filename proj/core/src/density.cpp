#include "qnd/density.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

#include "qnd/errors.hpp"

namespace qnd {

DensityMatrix DensityMatrix::from_matrix(const Eigen::MatrixXcd& m, const Tolerances& tol) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionMismatch("density matrix must be square and nonempty");
  }
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.hermitian) {
    std::ostringstream os;
    os << "not Hermitian: max |rho - rho^dag| = " << herm;
    throw NotHermitian(os.str());
  }
  const double tr_err = std::abs(m.trace() - std::complex<double>(1.0, 0.0));
  if (tr_err > tol.trace) {
    std::ostringstream os;
    os << "trace != 1: |tr(rho) - 1| = " << tr_err;
    throw NotUnitTrace(os.str());
  }
  Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
  sym /= sym.trace().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw EigenFailure("eigendecomposition failed during density validation");
  }
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -tol.psd_floor) {
    std::ostringstream os;
    os << "not positive semidefinite: min eigenvalue = " << min_eig;
    throw NotPositive(os.str());
  }
  return DensityMatrix(std::move(sym));
}

DensityMatrix DensityMatrix::basis_projector(Eigen::Index dim, Eigen::Index n) {
  if (n < 0 || n >= dim) {
    throw DimensionMismatch("basis index out of range");
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  m(n, n) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::repair(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd sym = 0.5 * (m + m.adjoint());
  sym /= sym.trace().real();
  return DensityMatrix(std::move(sym));
}

double DensityMatrix::trace_distance(const DensityMatrix& other) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_ - other.m_, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qnd
