#include "qnd/kraus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qnd/errors.hpp"

namespace qnd {

std::string KrausValidation::describe() const {
  if (violations.empty()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].assumption << ": " << violations[i].detail;
  }
  return os.str();
}

KrausValidation validate_kraus(const std::vector<Eigen::MatrixXcd>& ops, const Tolerances& tol) {
  KrausValidation out;
  if (ops.empty()) {
    out.violations.push_back({"shape", "no operators given"});
    return out;
  }
  const Eigen::Index d = ops[0].rows();
  for (const auto& m : ops) {
    if (m.rows() != m.cols() || m.rows() != d) {
      out.violations.push_back({"shape", "operators must all be square with equal dimension"});
      return out;
    }
  }
  const Eigen::Index m_count = static_cast<Eigen::Index>(ops.size());

  Eigen::MatrixXcd completeness = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& m : ops) completeness += m.adjoint() * m;
  const double comp_res = (completeness - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
  if (comp_res > tol.kraus_completeness) {
    std::ostringstream os;
    os << "sum M^dag M deviates from identity by " << comp_res;
    out.violations.push_back({"completeness", os.str()});
  }

  for (Eigen::Index mu = 0; mu < m_count; ++mu) {
    Eigen::MatrixXcd off = ops[mu];
    off.diagonal().setZero();
    const double od = off.cwiseAbs().maxCoeff();
    if (od > tol.kraus_diagonal) {
      std::ostringstream os;
      os << "operator " << mu << " has off-diagonal magnitude " << od;
      out.violations.push_back({"qnd-diagonality", os.str()});
    }
  }

  Eigen::MatrixXcd coeff(m_count, d);
  for (Eigen::Index mu = 0; mu < m_count; ++mu) coeff.row(mu) = ops[mu].diagonal().transpose();
  Eigen::MatrixXd weight = coeff.cwiseAbs2();

  // distinguishability: every basis pair must be separated by some outcome's
  // statistics.
  for (Eigen::Index n1 = 0; n1 < d; ++n1) {
    for (Eigen::Index n2 = n1 + 1; n2 < d; ++n2) {
      const double sep = (weight.col(n1) - weight.col(n2)).cwiseAbs().maxCoeff();
      if (sep <= tol.separation) {
        std::ostringstream os;
        os << "basis states " << n1 << " and " << n2
           << " share measurement statistics (max separation " << sep << ")";
        out.violations.push_back({"distinguishability", os.str()});
      }
    }
  }

  if (out.violations.empty()) {
    out.set = KrausSet(ops, std::move(coeff), std::move(weight));
  }
  return out;
}

Eigen::VectorXd outcome_probabilities(const KrausSet& k, const DensityMatrix& rho) {
  if (k.dim() != rho.dim()) {
    throw DimensionMismatch("Kraus set / state dimension mismatch");
  }
  Eigen::VectorXd p = k.weights() * rho.populations();
  return p.cwiseMax(0.0);
}

DensityMatrix collapse(const KrausSet& k, Eigen::Index mu, const DensityMatrix& rho,
                       const Tolerances& tol) {
  if (k.dim() != rho.dim()) {
    throw DimensionMismatch("Kraus set / state dimension mismatch");
  }
  if (mu < 0 || mu >= k.count()) {
    throw DimensionMismatch("outcome index out of range");
  }
  const Eigen::VectorXd p = outcome_probabilities(k, rho);
  if (p(mu) <= tol.p_floor) {
    std::ostringstream os;
    os << "outcome " << mu << " has probability " << p(mu) << " <= p_floor";
    throw ZeroProbabilityOutcome(os.str());
  }
  // Diagonal operators: M rho M^dag scales entry (i,j) by c_i conj(c_j).
  const Eigen::Index d = k.dim();
  Eigen::MatrixXcd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      m(i, j) = k.coefficient(mu, i) * std::conj(k.coefficient(mu, j)) * rho.matrix()(i, j);
    }
  }
  return DensityMatrix::repair(m);
}

MeasurementOutcome sample_outcome(const KrausSet& k, const DensityMatrix& rho, RngStream& rng) {
  const Eigen::VectorXd p = outcome_probabilities(k, rho);
  const double x = rng.uniform() * p.sum();
  double acc = 0.0;
  Eigen::Index chosen = -1;
  for (Eigen::Index mu = 0; mu < p.size(); ++mu) {
    if (p(mu) <= 0.0) continue;
    acc += p(mu);
    chosen = mu;
    if (x < acc) break;
  }
  // Clamp: roundoff at the top of the CDF falls into the last positive bin.
  return MeasurementOutcome{chosen, p(chosen)};
}

KrausValidation load_kraus_json(const std::string& path, const Tolerances& tol) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open Kraus file: " + path);
  nlohmann::json j;
  in >> j;
  const Eigen::Index d = j.at("dim").get<Eigen::Index>();
  std::vector<Eigen::MatrixXcd> ops;
  for (const auto& jop : j.at("operators")) {
    Eigen::MatrixXcd m(d, d);
    if (static_cast<Eigen::Index>(jop.size()) != d) {
      throw ConfigError("operator row count does not match dim in " + path);
    }
    for (Eigen::Index r = 0; r < d; ++r) {
      const auto& row = jop.at(r);
      if (static_cast<Eigen::Index>(row.size()) != d) {
        throw ConfigError("operator column count does not match dim in " + path);
      }
      for (Eigen::Index c = 0; c < d; ++c) {
        m(r, c) = std::complex<double>(row.at(c).at(0).get<double>(),
                                       row.at(c).at(1).get<double>());
      }
    }
    ops.push_back(std::move(m));
  }
  return validate_kraus(ops, tol);
}

}  // namespace qnd
