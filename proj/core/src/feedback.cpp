#include "qnd/feedback.hpp"

#include <cmath>

#include "qnd/errors.hpp"

namespace qnd {

namespace {

// Snap to a 2^-32 grid. Coarse enough to absorb the rounding noise a
// constant shift of sigma leaves in the differences, fine enough (~2e-10)
// to be irrelevant for the control itself.
double snap(double x) {
  return std::nearbyint(x * 0x1.0p32) * 0x1.0p-32;
}

}  // namespace

ClosedLoopContext::ClosedLoopContext(KrausSet kraus, ControlModel control, LyapunovWeights weights,
                                     Tolerances tol)
    : kraus_(std::move(kraus)),
      control_(std::move(control)),
      weights_(std::move(weights)),
      tol_(tol) {
  const Eigen::Index d = kraus_.dim();
  if (control_.hamiltonian().dim() != d || weights_.sigma.size() != d) {
    throw DimensionMismatch("Kraus set, Hamiltonian and weights must share one dimension");
  }
  canonical_sigma_.resize(d);
  const double ref = weights_.sigma(weights_.target);
  for (Eigen::Index n = 0; n < d; ++n) {
    canonical_sigma_(n) = snap(weights_.sigma(n) - ref);
  }
}

double ClosedLoopContext::control_objective(const Eigen::VectorXd& pops) const {
  return canonical_sigma_.dot(pops) + 0.25 * weights_.epsilon * pops.squaredNorm();
}

double ClosedLoopContext::control_objective(const DensityMatrix& rho) const {
  return control_objective(rho.populations());
}

std::pair<double, double> u_derivatives(const ClosedLoopContext& ctx, const DensityMatrix& rho) {
  const Eigen::MatrixXcd& h = ctx.control().hamiltonian().matrix();
  if (rho.dim() != h.rows()) {
    throw DimensionMismatch("state/context dimension mismatch");
  }
  const Eigen::Index d = rho.dim();
  const double eps = ctx.weights().epsilon;
  const Eigen::VectorXd& sigma = ctx.canonical_sigma();
  const Eigen::VectorXd a = rho.populations();

  // Populations of U_u(rho) to second order: a_n + b_n u + c_n u^2 with
  // b_n = -i [H,rho]_nn and c_n = -(1/2) [H,[H,rho]]_nn.
  const Eigen::MatrixXcd c1 = commutator(h, rho.matrix());
  const Eigen::MatrixXcd c2 = commutator(h, c1);
  double d1 = 0.0;
  double d2 = 0.0;
  for (Eigen::Index n = 0; n < d; ++n) {
    const double w = sigma(n) + 0.5 * eps * a(n);
    const std::complex<double> hrho_nn = (h.row(n) * rho.matrix().col(n))(0, 0);
    const double bn = 2.0 * hrho_nn.imag();
    const double cn = -0.5 * c2(n, n).real();
    d1 += w * bn;
    d2 += 2.0 * w * cn + 0.5 * eps * bn * bn;
  }
  return {d1, d2};
}

double argmax_quadratic(double d1, double d2, double u_bound) {
  if (d2 < 0.0) {
    const double vertex = -d1 / d2;
    return std::clamp(vertex, -u_bound, u_bound);
  }
  // Convex or flat: the maximum sits at an endpoint. D1 = 0 ties break to
  // +u_bound, a fixed documented choice.
  return (d1 < 0.0) ? -u_bound : u_bound;
}

double argmax_exact(const ClosedLoopContext& ctx, const DensityMatrix& rho, double tol_u) {
  const PropagatorCache& cache = ctx.control().cache();
  const double ub = ctx.control().u_bound();
  auto objective = [&](double u) {
    const UnitaryPropagator prop = cache.at(u);
    const Eigen::VectorXd pops =
        (prop.matrix * rho.matrix() * prop.matrix.adjoint()).diagonal().real();
    return ctx.control_objective(pops);
  };

  constexpr int kGridPoints = 33;
  double best_u = -ub;
  double best_f = objective(-ub);
  for (int i = 1; i < kGridPoints; ++i) {
    const double u = -ub + 2.0 * ub * static_cast<double>(i) / (kGridPoints - 1);
    const double f = objective(u);
    if (f > best_f) {
      best_f = f;
      best_u = u;
    }
  }

  // Golden-section refinement around the best grid point.
  const double step = 2.0 * ub / (kGridPoints - 1);
  double lo = std::max(-ub, best_u - step);
  double hi = std::min(ub, best_u + step);
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = objective(c);
  double fd = objective(d);
  while (hi - lo > tol_u) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = objective(d);
    }
    if (fc > best_f) {
      best_f = fc;
      best_u = c;
    }
    if (fd > best_f) {
      best_f = fd;
      best_u = d;
    }
  }
  return best_u;
}

double feedback(const ClosedLoopContext& ctx, const DensityMatrix& rho_half) {
  if (ctx.control().mode() == ControlMode::Exact) {
    return argmax_exact(ctx, rho_half);
  }
  const auto [d1, d2] = u_derivatives(ctx, rho_half);
  return argmax_quadratic(d1, d2, ctx.control().u_bound());
}

std::tuple<MeasurementOutcome, double, DensityMatrix> step_closed(const DensityMatrix& rho,
                                                                  const ClosedLoopContext& ctx,
                                                                  RngStream& rng) {
  MeasurementOutcome mu = sample_outcome(ctx.kraus(), rho, rng);
  DensityMatrix half = collapse(ctx.kraus(), mu.index, rho, ctx.tolerances());
  const double u = feedback(ctx, half);
  DensityMatrix next = apply_unitary(ctx.control().cache().at(u), half);
  return {mu, u, std::move(next)};
}

std::pair<double, double> q1_q2_diagnostics(const DensityMatrix& rho,
                                            const ClosedLoopContext& ctx) {
  const Eigen::VectorXd p = outcome_probabilities(ctx.kraus(), rho);
  const double w_here = ctx.control_objective(rho);
  double q1 = 0.0;
  double q2 = 0.0;
  for (Eigen::Index mu = 0; mu < ctx.kraus().count(); ++mu) {
    if (p(mu) <= ctx.tolerances().p_floor) continue;
    const DensityMatrix half = collapse(ctx.kraus(), mu, rho, ctx.tolerances());
    const double w_half = ctx.control_objective(half);
    const double u = feedback(ctx, half);
    const DensityMatrix moved = apply_unitary(ctx.control().cache().at(u), half);
    q1 += p(mu) * (w_half - w_here);
    q2 += p(mu) * (ctx.control_objective(moved) - w_half);
  }
  return {q1, q2};
}

}  // namespace qnd
