#include "qnd/lyapunov.hpp"

#include <limits>
#include <numeric>
#include <sstream>

#include "qnd/errors.hpp"

namespace qnd {

namespace {

struct UnionFind {
  std::vector<Eigen::Index> parent;
  explicit UnionFind(Eigen::Index n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  Eigen::Index find(Eigen::Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(Eigen::Index a, Eigen::Index b) { parent[find(a)] = find(b); }
};

}  // namespace

ConnectivityGraph connectivity_graph(const HermitianOperator& h, double edge_tol) {
  const Eigen::Index d = h.dim();
  ConnectivityGraph g;
  g.dim = d;
  UnionFind uf(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (std::abs(h.matrix()(i, j)) > edge_tol) {
        g.edges.emplace_back(i, j);
        uf.unite(i, j);
      }
    }
  }
  g.connected = true;
  for (Eigen::Index i = 1; i < d; ++i) {
    if (uf.find(i) != uf.find(0)) {
      g.connected = false;
      break;
    }
  }
  return g;
}

Eigen::MatrixXd laplacian(const HermitianOperator& h) {
  const Eigen::Index d = h.dim();
  const Eigen::MatrixXcd h2 = h.matrix() * h.matrix();
  Eigen::MatrixXd r(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double diag = (i == j) ? h2(i, j).real() : 0.0;
      r(i, j) = 2.0 * (diag - std::norm(h.matrix()(i, j)));
    }
  }
  return r;
}

Eigen::VectorXd assemble_lambda(const Eigen::VectorXd& gaps, Eigen::Index target) {
  const Eigen::Index d = gaps.size();
  if (target < 0 || target >= d) {
    throw DimensionMismatch("target index out of range");
  }
  Eigen::VectorXd lambda = gaps;
  double sum = 0.0;
  for (Eigen::Index n = 0; n < d; ++n) {
    if (n == target) continue;
    if (gaps(n) <= 0.0) {
      std::ostringstream os;
      os << "gap lambda_" << n << " must be strictly positive, got " << gaps(n);
      throw ConfigError(os.str());
    }
    sum += gaps(n);
  }
  lambda(target) = -sum;
  return lambda;
}

Eigen::VectorXd solve_sigma(const Eigen::MatrixXd& laplacian_matrix, const Eigen::VectorXd& gaps,
                            Eigen::Index target, const Tolerances& tol) {
  const Eigen::Index d = laplacian_matrix.rows();
  if (laplacian_matrix.cols() != d || gaps.size() != d) {
    throw DimensionMismatch("Laplacian / gap vector dimension mismatch");
  }
  const Eigen::VectorXd lambda = assemble_lambda(gaps, target);

  // Connectedness of the Laplacian's own graph; without it the right-hand
  // side may fall outside the image.
  {
    UnionFind uf(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i + 1; j < d; ++j) {
        if (std::abs(laplacian_matrix(i, j)) > tol.edge_tol) uf.unite(i, j);
      }
    }
    for (Eigen::Index i = 1; i < d; ++i) {
      if (uf.find(i) != uf.find(0)) {
        throw DisconnectedGraph("connectivity graph of H is not connected");
      }
    }
  }

  // Pinned least-squares system [R; 1^T] sigma = [-lambda; 0] selects the
  // minimum-norm representative of the gauge class.
  Eigen::MatrixXd a(d + 1, d);
  a.topRows(d) = laplacian_matrix;
  a.row(d).setOnes();
  Eigen::VectorXd b(d + 1);
  b.head(d) = -lambda;
  b(d) = 0.0;
  Eigen::VectorXd sigma = a.colPivHouseholderQr().solve(b);

  const double residual = (laplacian_matrix * sigma + lambda).cwiseAbs().maxCoeff();
  if (!sigma.allFinite() || residual > tol.sigma_residual) {
    std::ostringstream os;
    os << "sigma solve residual " << residual << " exceeds " << tol.sigma_residual;
    throw SingularSolve(os.str());
  }
  return sigma;
}

double epsilon_max(const HermitianOperator& h, const Eigen::VectorXd& gaps, Eigen::Index target) {
  const Eigen::Index d = h.dim();
  const Eigen::MatrixXcd h2 = h.matrix() * h.matrix();
  double bound = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < d; ++n) {
    if (n == target) continue;
    const double mean = h.matrix()(n, n).real();
    const double variance = h2(n, n).real() - mean * mean;
    if (variance > 0.0) {
      bound = std::min(bound, gaps(n) / variance);
    }
  }
  return bound;
}

LyapunovWeights synthesize_weights(const HermitianOperator& h, const Eigen::VectorXd& gaps,
                                   Eigen::Index target, double epsilon, const Tolerances& tol) {
  const Eigen::MatrixXd r = laplacian(h);
  LyapunovWeights w;
  w.target = target;
  w.lambda = assemble_lambda(gaps, target);
  w.sigma = solve_sigma(r, gaps, target, tol);
  w.epsilon = epsilon;
  w.residual = (r * w.sigma + w.lambda).cwiseAbs().maxCoeff();

  for (Eigen::Index n = 0; n < w.sigma.size(); ++n) {
    if (n != target && w.sigma(n) >= w.sigma(target)) {
      std::ostringstream os;
      os << "sigma has no strict maximum at the target: sigma_" << n << " = " << w.sigma(n)
         << " >= sigma_" << target << " = " << w.sigma(target);
      throw HypothesisViolation(os.str());
    }
  }
  if (epsilon <= 0.0) {
    throw HypothesisViolation("epsilon must be strictly positive");
  }
  const double emax = epsilon_max(h, gaps, target);
  if (epsilon >= emax) {
    std::ostringstream os;
    os << "epsilon " << epsilon << " violates the convexity bound " << emax;
    throw HypothesisViolation(os.str());
  }
  return w;
}

double W0(const LyapunovWeights& w, const DensityMatrix& rho) {
  return w.sigma.dot(rho.populations());
}

double Weps(const LyapunovWeights& w, const DensityMatrix& rho) {
  const Eigen::VectorXd pop = rho.populations();
  return w.sigma.dot(pop) + 0.25 * w.epsilon * pop.squaredNorm();
}

double second_derivative_check(const Eigen::MatrixXd& laplacian_matrix, const LyapunovWeights& w,
                               Eigen::Index n) {
  return -laplacian_matrix.row(n).dot(w.sigma);
}

}  // namespace qnd
