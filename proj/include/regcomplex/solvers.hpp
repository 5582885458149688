#pragma once

#include "regcomplex/linop.hpp"
#include "regcomplex/prox.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace regcomplex {

/// min_x 1/2 |A x - b|^2 + R(Q x), where `regulariser` already carries the
/// regularisation weight and Q defaults to the identity.
struct ProblemSpec {
  LinearMap forward;
  Vector data;
  Functional regulariser;
  std::optional<LinearMap> reg_operator;

  /// Throws DimensionError on inconsistent shapes.
  void validate() const;
  LinearMap q() const;
  double objective(const Vector& x) const;
};

/// FB: tau * L < 1 with L = |A|^2 (sigma unused).
/// PDPS: tau * sigma * L^2 < 1 with L = |K|.
struct StepParams {
  double tau = 0.0;
  double sigma = 0.0;
  double lipschitz_or_norm = 0.0;
};

/// Default PDPS steps tau = 5 / L, sigma = 0.99 / (5 L) for L = |K|.
StepParams pdps_default_steps(double k_norm);

struct IterationRecord {
  int k = 0;
  double objective = 0.0;
  std::optional<double> distance;
  std::optional<double> ergodic_objective;  // PDPS only
  std::optional<double> ergodic_distance;   // PDPS only
};

/// One record per performed iteration k = 1..N; the starting point is kept
/// separately so that a zero-iteration run has an empty record list.
struct SolveTrace {
  double initial_objective = 0.0;
  std::vector<IterationRecord> records;
  Vector final_primal;
  Vector final_dual;      // PDPS only
  Vector ergodic_primal;  // PDPS only: mean of x^1..x^N (x^0 when N = 0)
  Vector ergodic_dual;    // PDPS only
  int iterations = 0;
};

/// Called after every iteration with (k, x^k, y^k); y is empty for FB.
using IterationObserver = std::function<void(int, const Vector&, const Vector&)>;

/// x^{k+1} = prox_{tau R}(x^k - tau A^T (A x^k - b)).
/// Requires an identity regulariser operator and tau * |A|^2 < 1.
SolveTrace forward_backward(const ProblemSpec& spec, const StepParams& params, const Vector& x0, int n_iters,
                            const std::optional<Vector>& xhat = std::nullopt,
                            const IterationObserver& observer = nullptr);

/// |x0 - xhat|^2 / (2 tau n).
double fb_accuracy_bound(const Vector& x0, const Vector& xhat, double tau, int n);

/// The saddle-point form min_x max_y <K x, y> - G*(y) with K = (A, Q) and
/// G(y1, y2) = 1/2 |y1 - b|^2 + R(y2). The primal term F is zero.
struct SaddlePointProblem {
  LinearMap k;
  Functional data_term;
  Functional reg_term;

  static SaddlePointProblem from(const ProblemSpec& spec);

  Index data_dim() const { return data_term.data()->size(); }
  double g_conjugate(const Vector& y) const;
  Vector prox_g_conjugate(double sigma, const Vector& y) const;
  /// G(K x), i.e. the primal objective.
  double primal_objective(const Vector& x) const;
};

/// x^{k+1} = x^k - tau K^T y^k,
/// y^{k+1} = prox_{sigma G*}(y^k + sigma K (2 x^{k+1} - x^k)).
SolveTrace pdps(const ProblemSpec& spec, const StepParams& params, const Vector& x0, const Vector& y0, int n_iters,
                const std::optional<Vector>& xhat = std::nullopt, const IterationObserver& observer = nullptr);

/// tau^{-1} |dx|^2 - 2 <K dx, dy> + sigma^{-1} |dy|^2.
double m_norm_squared(const StepParams& params, const LinearMap& k, const Vector& dx, const Vector& dy);

/// (F(x) + <K x, yref> - G*(yref)) - (F(xref) + <K xref, y> - G*(y)) with F = 0.
/// Infinite conjugate values propagate as +-infinity.
double lagrangian_gap(const SaddlePointProblem& problem, const Vector& x, const Vector& y, const Vector& xref,
                      const Vector& yref);

/// max over sampled dual points yc of |(x0, y0) - (xhat, yc)|_M^2 / (2 n).
/// A lower approximation of the supremum over the dual ball.
double pdps_accuracy_bound(const Vector& x0, const Vector& y0, const Vector& xhat,
                           const std::vector<Vector>& y_ball_samples, const StepParams& params, const LinearMap& k,
                           int n);

/// Minimiser of 1/2 |A x - b|^2 + alpha/2 |x|^2 via Cholesky on
/// (A^T A + alpha I) x = A^T b.
Vector tikhonov_solve(const LinearMap& a, const Vector& b, double alpha);

class NotConvergedError : public std::runtime_error {
 public:
  NotConvergedError(const std::string& what, Vector last_iterate)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)) {}
  const Vector& last_iterate() const { return last_iterate_; }

 private:
  Vector last_iterate_;
};

/// Minimiser of 1/2 |A x - b|^2 + alpha/2 |x|^2 over x >= 0 by projected
/// gradient with step 1 / (|A|^2 + alpha). Stops once the iterate changes by
/// less than `tol`; throws NotConvergedError after `max_iter` iterations.
Vector tikhonov_nonneg_solve(const LinearMap& a, const Vector& b, double alpha, double tol = 1e-12,
                             int max_iter = 100000);

}  // namespace regcomplex
