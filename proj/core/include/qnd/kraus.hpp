#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "qnd/density.hpp"
#include "qnd/rng.hpp"
#include "qnd/tolerances.hpp"

namespace qnd {

class KrausSet;
struct KrausValidation;
KrausValidation validate_kraus(const std::vector<Eigen::MatrixXcd>& ops, const Tolerances& tol);

/// QND measurement model: m Kraus operators diagonal in a common basis,
/// M_mu = sum_n c_{mu,n} |n><n|. The coefficient table is extracted once at
/// validation; all probability computations run on it in O(m d).
class KrausSet {
 public:
  Eigen::Index dim() const { return coeff_.cols(); }
  Eigen::Index count() const { return coeff_.rows(); }

  const std::vector<Eigen::MatrixXcd>& operators() const { return ops_; }

  /// c_{mu,n}
  std::complex<double> coefficient(Eigen::Index mu, Eigen::Index n) const { return coeff_(mu, n); }
  /// |c_{mu,n}|^2
  double weight(Eigen::Index mu, Eigen::Index n) const { return weight_(mu, n); }
  const Eigen::MatrixXd& weights() const { return weight_; }

 private:
  KrausSet(std::vector<Eigen::MatrixXcd> ops, Eigen::MatrixXcd coeff, Eigen::MatrixXd weight)
      : ops_(std::move(ops)), coeff_(std::move(coeff)), weight_(std::move(weight)) {}

  std::vector<Eigen::MatrixXcd> ops_;
  Eigen::MatrixXcd coeff_;   // m x d coefficient table
  Eigen::MatrixXd weight_;   // m x d, |c|^2

  friend KrausValidation validate_kraus(const std::vector<Eigen::MatrixXcd>&, const Tolerances&);
};

struct KrausViolation {
  std::string assumption;  // "completeness" | "qnd-diagonality" | "distinguishability" | "shape"
  std::string detail;
};

/// Result of validate_kraus. The report is the error channel: no exceptions.
struct KrausValidation {
  std::optional<KrausSet> set;
  std::vector<KrausViolation> violations;

  bool ok() const { return set.has_value() && violations.empty(); }
  std::string describe() const;
};

/// Checks completeness, QND diagonality and pairwise statistic
/// separation (for every n1 != n2 some mu has
/// ||c_{mu,n1}|^2 - |c_{mu,n2}|^2| > tol.separation).
KrausValidation validate_kraus(const std::vector<Eigen::MatrixXcd>& ops,
                               const Tolerances& tol = {});

struct MeasurementOutcome {
  Eigen::Index index = 0;
  double probability = 0.0;
};

/// p_mu = sum_n |c_{mu,n}|^2 <n|rho|n>. Nonnegative, sums to 1.
Eigen::VectorXd outcome_probabilities(const KrausSet& k, const DensityMatrix& rho);

/// rho -> M_mu rho M_mu^dag / p_mu. Throws ZeroProbabilityOutcome when
/// p_mu <= tol.p_floor.
DensityMatrix collapse(const KrausSet& k, Eigen::Index mu, const DensityMatrix& rho,
                       const Tolerances& tol = {});

/// Inverse-CDF draw over outcome_probabilities; deterministic given the
/// stream state. A final clamp ensures zero-probability outcomes are never
/// selected.
MeasurementOutcome sample_outcome(const KrausSet& k, const DensityMatrix& rho, RngStream& rng);

/// Loads {"dim": d, "operators": [[[re, im], ...], ...]} and routes the
/// matrices through validate_kraus.
KrausValidation load_kraus_json(const std::string& path, const Tolerances& tol = {});

}  // namespace qnd
