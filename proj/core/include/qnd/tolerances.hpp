#pragma once

namespace qnd {

/// Central record of every numerical tolerance used by invariant checks.
/// All validation code reads from an instance of this struct; the defaults
/// are the ones the library is tested against.
struct Tolerances {
  double hermitian = 1e-10;         // max |rho - rho^dag| entrywise
  double trace = 1e-10;             // |tr(rho) - 1|
  double psd_floor = 1e-9;          // eigenvalues >= -psd_floor tolerated
  double generator_hermitian = 1e-12;
  double unitarity = 1e-10;         // |U U^dag - I| entrywise
  double kraus_completeness = 1e-10;
  double kraus_diagonal = 1e-12;    // off-diagonal magnitude of QND operators
  double separation = 1e-9;         // pairwise |c|^2 separation (distinguishability)
  double p_floor = 1e-12;           // outcome probabilities below this are "impossible"
  double edge_tol = 1e-12;          // connectivity-graph edge threshold
  double sigma_residual = 1e-10;    // ||R sigma + lambda||_inf after the solve
};

}  // namespace qnd
