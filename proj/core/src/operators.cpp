#include "qnd/operators.hpp"

#include <Eigen/Eigenvalues>
#include <sstream>

#include "qnd/errors.hpp"

namespace qnd {

HermitianOperator HermitianOperator::from_matrix(const Eigen::MatrixXcd& m, const Tolerances& tol) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionMismatch("Hermitian operator must be square and nonempty");
  }
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.generator_hermitian) {
    std::ostringstream os;
    os << "generator not Hermitian: max |H - H^dag| = " << herm;
    throw NotHermitian(os.str());
  }
  return HermitianOperator(0.5 * (m + m.adjoint()));
}

PropagatorCache::PropagatorCache(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.matrix());
  if (es.info() != Eigen::Success) {
    throw EigenFailure("eigendecomposition of H did not converge");
  }
  eigenvectors_ = es.eigenvectors();
  eigenvalues_ = es.eigenvalues();
}

UnitaryPropagator PropagatorCache::at(double u) const {
  const Eigen::Index d = dim();
  Eigen::VectorXcd phase(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    phase(i) = std::exp(std::complex<double>(0.0, -u * eigenvalues_(i)));
  }
  Eigen::MatrixXcd m = eigenvectors_ * phase.asDiagonal() * eigenvectors_.adjoint();
  return UnitaryPropagator{std::move(m), u};
}

UnitaryPropagator propagator(const HermitianOperator& h, double u) {
  return PropagatorCache(h).at(u);
}

DensityMatrix apply_unitary(const UnitaryPropagator& u, const DensityMatrix& rho) {
  if (u.dim() != rho.dim()) {
    throw DimensionMismatch("propagator/state dimension mismatch");
  }
  return DensityMatrix::repair(u.matrix * rho.matrix() * u.matrix.adjoint());
}

Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw DimensionMismatch("commutator needs square matrices of equal dimension");
  }
  return a * b - b * a;
}

Eigen::MatrixXcd bch_second_order(const DensityMatrix& rho, const HermitianOperator& h, double u) {
  if (rho.dim() != h.dim()) {
    throw DimensionMismatch("state/generator dimension mismatch");
  }
  const Eigen::MatrixXcd c1 = commutator(h.matrix(), rho.matrix());
  const Eigen::MatrixXcd c2 = commutator(h.matrix(), c1);
  return rho.matrix() - std::complex<double>(0.0, u) * c1 - (0.5 * u * u) * c2;
}

}  // namespace qnd
