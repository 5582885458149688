#include "regcomplex/solvers.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace regcomplex {

namespace {

void require_steps(const char* what, const StepParams& params) {
  if (!(params.tau > 0.0)) throw std::invalid_argument(std::string(what) + ": tau must be positive");
  if (!(params.lipschitz_or_norm >= 0.0) || !std::isfinite(params.lipschitz_or_norm)) {
    throw std::invalid_argument(std::string(what) + ": lipschitz_or_norm must be finite and nonnegative");
  }
}

// Objective from a precomputed residual A x - b.
double objective_from_residual(const Functional& reg, const Vector& residual, const Vector& qx) {
  return 0.5 * residual.squaredNorm() + value(reg, qx);
}

}  // namespace

void ProblemSpec::validate() const {
  require_length("ProblemSpec data", data, forward.codomain_dim());
  if (reg_operator && reg_operator->domain_dim() != forward.domain_dim()) {
    throw DimensionError("ProblemSpec reg_operator domain", forward.domain_dim(), reg_operator->domain_dim());
  }
}

LinearMap ProblemSpec::q() const { return reg_operator ? *reg_operator : make_identity(forward.domain_dim()); }

double ProblemSpec::objective(const Vector& x) const {
  const Vector residual = forward.apply(x) - data;
  return objective_from_residual(regulariser, residual, reg_operator ? reg_operator->apply(x) : x);
}

StepParams pdps_default_steps(double k_norm) {
  if (!(k_norm > 0.0)) throw std::invalid_argument("pdps_default_steps: operator norm must be positive");
  return {5.0 / k_norm, 0.99 / (5.0 * k_norm), k_norm};
}

SolveTrace forward_backward(const ProblemSpec& spec, const StepParams& params, const Vector& x0, int n_iters,
                            const std::optional<Vector>& xhat, const IterationObserver& observer) {
  spec.validate();
  require_steps("forward_backward", params);
  if (params.tau * params.lipschitz_or_norm >= 1.0) {
    throw std::invalid_argument("forward_backward: step violates tau * L < 1 (tau * L = " +
                                std::to_string(params.tau * params.lipschitz_or_norm) + ")");
  }
  if (spec.reg_operator && spec.reg_operator->kind() != LinearMap::Kind::Identity) {
    throw std::invalid_argument(
        "forward_backward: the regulariser is composed with a non-identity operator; use pdps instead");
  }
  if (n_iters < 0) throw std::invalid_argument("forward_backward: n_iters must be nonnegative");
  require_length("forward_backward x0", x0, spec.forward.domain_dim());
  if (xhat) require_length("forward_backward xhat", *xhat, spec.forward.domain_dim());

  const LinearMap& a = spec.forward;
  const double tau = params.tau;
  Vector x = x0;
  Vector residual = a.apply(x) - spec.data;

  SolveTrace trace;
  trace.initial_objective = objective_from_residual(spec.regulariser, residual, x);
  trace.records.reserve(static_cast<std::size_t>(n_iters));
  const Vector empty_dual;
  for (int k = 1; k <= n_iters; ++k) {
    x = prox(spec.regulariser, tau, x - tau * a.adjoint_apply(residual));
    residual = a.apply(x) - spec.data;
    IterationRecord rec;
    rec.k = k;
    rec.objective = objective_from_residual(spec.regulariser, residual, x);
    if (xhat) rec.distance = (x - *xhat).norm();
    trace.records.push_back(rec);
    if (observer) observer(k, x, empty_dual);
  }
  trace.final_primal = std::move(x);
  trace.iterations = n_iters;
  return trace;
}

double fb_accuracy_bound(const Vector& x0, const Vector& xhat, double tau, int n) {
  if (n < 1) throw std::invalid_argument("fb_accuracy_bound: n must be at least 1");
  if (!(tau > 0.0)) throw std::invalid_argument("fb_accuracy_bound: tau must be positive");
  require_length("fb_accuracy_bound xhat", xhat, x0.size());
  return (x0 - xhat).squaredNorm() / (2.0 * tau * n);
}

SaddlePointProblem SaddlePointProblem::from(const ProblemSpec& spec) {
  spec.validate();
  return {make_stack(spec.forward, spec.q()), Functional::squared_distance_to_data(spec.data), spec.regulariser};
}

double SaddlePointProblem::g_conjugate(const Vector& y) const {
  require_length("SaddlePointProblem dual", y, k.codomain_dim());
  const Index m = data_dim();
  return conjugate_value(data_term, y.head(m)) + conjugate_value(reg_term, y.tail(y.size() - m));
}

Vector SaddlePointProblem::prox_g_conjugate(double sigma, const Vector& y) const {
  require_length("SaddlePointProblem dual", y, k.codomain_dim());
  const Index m = data_dim();
  Vector out(y.size());
  out.head(m) = prox_conjugate(data_term, sigma, y.head(m));
  out.tail(y.size() - m) = prox_conjugate(reg_term, sigma, y.tail(y.size() - m));
  return out;
}

double SaddlePointProblem::primal_objective(const Vector& x) const {
  const Vector kx = k.apply(x);
  const Index m = data_dim();
  return value(data_term, kx.head(m)) + value(reg_term, kx.tail(kx.size() - m));
}

SolveTrace pdps(const ProblemSpec& spec, const StepParams& params, const Vector& x0, const Vector& y0, int n_iters,
                const std::optional<Vector>& xhat, const IterationObserver& observer) {
  require_steps("pdps", params);
  if (!(params.sigma > 0.0)) throw std::invalid_argument("pdps: sigma must be positive");
  const double l = params.lipschitz_or_norm;
  if (params.tau * params.sigma * l * l >= 1.0) {
    throw std::invalid_argument("pdps: step violates tau * sigma * |K|^2 < 1 (product = " +
                                std::to_string(params.tau * params.sigma * l * l) + ")");
  }
  if (n_iters < 0) throw std::invalid_argument("pdps: n_iters must be nonnegative");
  const SaddlePointProblem problem = SaddlePointProblem::from(spec);
  require_length("pdps x0", x0, problem.k.domain_dim());
  require_length("pdps y0", y0, problem.k.codomain_dim());
  if (xhat) require_length("pdps xhat", *xhat, problem.k.domain_dim());

  const Index m = problem.data_dim();
  const Index p = problem.k.codomain_dim() - m;
  // G(K x) evaluated from a cached K x.
  auto objective_of = [&](const Vector& kx) {
    return value(problem.data_term, kx.head(m)) + value(problem.reg_term, kx.tail(p));
  };

  const double tau = params.tau;
  const double sigma = params.sigma;
  Vector x = x0;
  Vector y = y0;
  Vector kx = problem.k.apply(x);
  // K is linear, so K applied to the ergodic mean is the mean of the K x^k.
  Vector x_mean = x0, y_mean = y0, kx_mean = kx;

  SolveTrace trace;
  trace.initial_objective = objective_of(kx);
  trace.records.reserve(static_cast<std::size_t>(n_iters));
  for (int k = 1; k <= n_iters; ++k) {
    x -= tau * problem.k.adjoint_apply(y);
    const Vector kx_next = problem.k.apply(x);
    y = problem.prox_g_conjugate(sigma, y + sigma * (2.0 * kx_next - kx));
    kx = kx_next;

    const double weight = 1.0 / k;
    if (k == 1) {
      x_mean = x;
      y_mean = y;
      kx_mean = kx;
    } else {
      x_mean += weight * (x - x_mean);
      y_mean += weight * (y - y_mean);
      kx_mean += weight * (kx - kx_mean);
    }

    IterationRecord rec;
    rec.k = k;
    rec.objective = objective_of(kx);
    rec.ergodic_objective = objective_of(kx_mean);
    if (xhat) {
      rec.distance = (x - *xhat).norm();
      rec.ergodic_distance = (x_mean - *xhat).norm();
    }
    trace.records.push_back(rec);
    if (observer) observer(k, x, y);
  }
  trace.final_primal = std::move(x);
  trace.final_dual = std::move(y);
  trace.ergodic_primal = std::move(x_mean);
  trace.ergodic_dual = std::move(y_mean);
  trace.iterations = n_iters;
  return trace;
}

double m_norm_squared(const StepParams& params, const LinearMap& k, const Vector& dx, const Vector& dy) {
  if (!(params.tau > 0.0) || !(params.sigma > 0.0)) {
    throw std::invalid_argument("m_norm_squared: tau and sigma must be positive");
  }
  require_length("m_norm_squared dy", dy, k.codomain_dim());
  return dx.squaredNorm() / params.tau - 2.0 * k.apply(dx).dot(dy) + dy.squaredNorm() / params.sigma;
}

double lagrangian_gap(const SaddlePointProblem& problem, const Vector& x, const Vector& y, const Vector& xref,
                      const Vector& yref) {
  const double g_yref = problem.g_conjugate(yref);
  if (g_yref == kInfinity) return -kInfinity;
  const double g_y = problem.g_conjugate(y);
  if (g_y == kInfinity) return kInfinity;
  return (problem.k.apply(x).dot(yref) - g_yref) - (problem.k.apply(xref).dot(y) - g_y);
}

double pdps_accuracy_bound(const Vector& x0, const Vector& y0, const Vector& xhat,
                           const std::vector<Vector>& y_ball_samples, const StepParams& params, const LinearMap& k,
                           int n) {
  if (y_ball_samples.empty()) throw std::invalid_argument("pdps_accuracy_bound: no dual samples supplied");
  if (n < 1) throw std::invalid_argument("pdps_accuracy_bound: n must be at least 1");
  require_length("pdps_accuracy_bound xhat", xhat, x0.size());
  const Vector dx = x0 - xhat;
  double worst = -kInfinity;
  for (const Vector& yc : y_ball_samples) {
    require_length("pdps_accuracy_bound sample", yc, y0.size());
    worst = std::max(worst, m_norm_squared(params, k, dx, y0 - yc));
  }
  return worst / (2.0 * n);
}

Vector tikhonov_solve(const LinearMap& a, const Vector& b, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("tikhonov_solve: alpha must be positive");
  require_length("tikhonov_solve data", b, a.codomain_dim());
  const Matrix dense = to_dense(a);
  Matrix normal = dense.transpose() * dense;
  normal.diagonal().array() += alpha;
  const Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success) throw std::runtime_error("tikhonov_solve: Cholesky factorisation failed");
  return llt.solve(dense.transpose() * b);
}

Vector tikhonov_nonneg_solve(const LinearMap& a, const Vector& b, double alpha, double tol, int max_iter) {
  if (!(alpha > 0.0)) throw std::invalid_argument("tikhonov_nonneg_solve: alpha must be positive");
  require_length("tikhonov_nonneg_solve data", b, a.codomain_dim());
  const double norm = estimate_norm(a, 1e-12, 10000).value;
  const double tau = 1.0 / (norm * norm + alpha);
  Vector x = Vector::Zero(a.domain_dim());
  for (int it = 0; it < max_iter; ++it) {
    const Vector grad = a.adjoint_apply(a.apply(x) - b) + alpha * x;
    Vector next = (x - tau * grad).cwiseMax(0.0);
    const double change = (next - x).norm();
    x = std::move(next);
    if (change < tol) return x;
  }
  throw NotConvergedError("tikhonov_nonneg_solve: no convergence within " + std::to_string(max_iter) +
                              " iterations",
                          x);
}

}  // namespace regcomplex
