#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "qnd/density.hpp"
#include "qnd/operators.hpp"
#include "qnd/tolerances.hpp"

namespace qnd {

/// Undirected graph on the basis states, with an edge (n1, n2) whenever
/// |<n1|H|n2>| exceeds the edge tolerance.
struct ConnectivityGraph {
  Eigen::Index dim = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
  bool connected = false;
};

ConnectivityGraph connectivity_graph(const HermitianOperator& h, double edge_tol = 1e-12);

/// R_{n1,n2} = 2 (delta_{n1,n2} <n1|H^2|n2> - |<n1|H|n2>|^2).
/// Real symmetric, zero row sums, nonpositive off-diagonals.
Eigen::MatrixXd laplacian(const HermitianOperator& h);

/// Assembles the full gap vector: lambda_n for n != target, and
/// lambda_target = -sum of the others. `gaps` must be strictly positive;
/// gaps[target] is ignored.
Eigen::VectorXd assemble_lambda(const Eigen::VectorXd& gaps, Eigen::Index target);

/// Solves R sigma = -lambda for the minimum-norm sigma (orthogonal to the
/// constant vector), via least squares on the pinned system [R; 1^T].
/// Requires a connected graph; throws DisconnectedGraph otherwise.
Eigen::VectorXd solve_sigma(const Eigen::MatrixXd& laplacian_matrix, const Eigen::VectorXd& gaps,
                            Eigen::Index target, const Tolerances& tol = {});

/// Largest admissible epsilon:
/// min over n != target with <n|H^2|n> > <n|H|n>^2 of
/// lambda_n / (<n|H^2|n> - <n|H|n>^2); +infinity when unconstrained.
double epsilon_max(const HermitianOperator& h, const Eigen::VectorXd& gaps, Eigen::Index target);

struct LyapunovWeights {
  Eigen::Index target = 0;
  Eigen::VectorXd lambda;  // full vector, lambda[target] negative
  Eigen::VectorXd sigma;
  double epsilon = 0.0;
  double residual = 0.0;  // ||R sigma + lambda||_inf at construction
};

/// Full synthesis pipeline: Laplacian, sigma solve, validation that
/// sigma[target] is the strict unique maximum and epsilon < epsilon_max.
LyapunovWeights synthesize_weights(const HermitianOperator& h, const Eigen::VectorXd& gaps,
                                   Eigen::Index target, double epsilon,
                                   const Tolerances& tol = {});

/// W_0(rho) = sum_n sigma_n <n|rho|n>. Open-loop martingale.
double W0(const LyapunovWeights& w, const DensityMatrix& rho);

/// W_eps(rho) = W_0(rho) + (eps/4) sum_n <n|rho|n>^2.
double Weps(const LyapunovWeights& w, const DensityMatrix& rho);

/// Analytic second u-derivative of W_0(U_u(|n><n|)) at u = 0: -(R sigma)_n.
/// Equals lambda_n for n != target and the negative gap sum at the target.
double second_derivative_check(const Eigen::MatrixXd& laplacian_matrix, const LyapunovWeights& w,
                               Eigen::Index n);

}  // namespace qnd
