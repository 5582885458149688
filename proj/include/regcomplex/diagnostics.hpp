#pragma once

#include "regcomplex/linop.hpp"
#include "regcomplex/prox.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace regcomplex {

// ---------------------------------------------------------------------------
// Source conditions and the Lasso structure

/// A dual certificate w for the l1 source condition. d = -A^T w is always
/// recomputed from w; residual is the distance of d to Sign(xhat).
struct SourceCertificate {
  Vector w;
  Vector d;
  double residual = kInfinity;
  bool found = false;
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Gradient descent (step 1 / |A|^2) on w -> 1/2 dist^2(-A^T w, Sign xhat).
/// Components with |xhat_k| <= sign_tol count as zero. A residual above `tol`
/// after max_iter steps leaves found = false: evidence, not proof, that no
/// certificate exists.
SourceCertificate find_l1_certificate(const LinearMap& a, const Vector& xhat, double tol = 1e-10,
                                      int max_iter = 100000, double sign_tol = 1e-12);

/// Z = {k : |xhat_k| <= tol and |d_k| < 1 - tol}, zero-based.
struct Complementarity {
  bool strictly_complementary = false;
  std::vector<Index> z;
};

/// Throws std::invalid_argument unless d lies in Sign(xhat) to `tol`.
Complementarity strict_complementarity(const Vector& xhat, const Vector& d, double tol = 1e-9);

/// A^T A + sum_{k in Z} e_k e_k^T.
Matrix lasso_m_matrix(const Matrix& a, const std::vector<Index>& z);

/// Constants of the Lasso growth estimate on the ball of `radius` around xhat:
/// rho = |xhat|_inf + radius, beta0 = min_{k in Z}(1 - |d_k|) / rho,
/// beta = min(1, beta0), and any gamma < gamma_sup = min(1/2, beta lambda_min)
/// is admissible together with alpha <= 1/2 - gamma.
struct LassoGammaBound {
  std::vector<Index> z;
  double rho = 0.0;
  double beta0 = kInfinity;
  double beta = 1.0;
  double lambda_min = 0.0;
  double gamma_sup = 0.0;
};

LassoGammaBound lasso_admissible_gamma(const Matrix& a, const Vector& xhat, const Vector& d, double radius,
                                       double tol = 1e-9);

// ---------------------------------------------------------------------------
// Sampled local subdifferentiability

enum class SubregTarget { StrongNorm, SemiStrongDist };

/// x -> dist(x, Xhat).
using SetDistance = std::function<double(const Vector&)>;

/// Distance to the segment [p, q].
SetDistance segment_distance(Vector p, Vector q);

/// alpha [R(x) - R(xhat) - <d, x - xhat>] + (1/2 - gamma) |A(x - xhat)|^2
///   >= gamma gamma_delta * (|x - xhat|^2 or dist^2(x, Xhat)).
/// The data b_delta cancels from this form, so it is not an input.
struct SubdiffCheck {
  LinearMap a;
  Functional r;  // unweighted R
  double alpha = 0.0;
  Vector xhat;
  Vector d;
  double gamma = 0.0;
  double gamma_delta = 0.0;
  double radius = 0.0;
  int n_samples = 1000;
  std::uint64_t seed = 0;
  SubregTarget target = SubregTarget::StrongNorm;
  SetDistance distance;              // required for SemiStrongDist
  std::optional<double> rho;         // keep only samples with R(x) <= R(xhat) + rho
  std::vector<Vector> probe_points;  // evaluated in addition to the random samples
  double tol = 1e-12;
};

struct SubregularityReport {
  double gamma_tested = 0.0;
  int n_samples = 0;  // samples evaluated, probes included
  int n_filtered = 0;
  double min_slack = kInfinity;
  std::optional<Vector> violated_at;  // present iff min_slack <= -tol
  double tol = 0.0;
};

/// Uniform samples in the ball, sample i drawing from stream derive_seed(seed, i).
SubregularityReport check_strong_subdiff_sampled(const SubdiffCheck& check);

// ---------------------------------------------------------------------------
// Total variation

struct EllipticityReport {
  bool holds = false;
  double epsilon = 0.0;  // estimated smallest eigenvalue of K_O^T K_O + A^T A
  bool converged = true;
  std::string method;
};

/// Dense Jacobi when width * height <= 400, otherwise shifted power iteration.
EllipticityReport check_tv_ellipticity(const LinearMap& a, const FlatAreaCollection& collection, Index width,
                                       Index height, double tol = 1e-8);

/// phi and grad_xhat use the Grad2D layout (x-components, then y-components).
/// True iff on every region the gradient of xhat vanishes (to tol) and
/// max |phi| <= 1 - tol. Throws if |phi| > 1 + tol anywhere.
bool strictly_flat_check(const Vector& phi, const FlatAreaCollection& collection, const Vector& grad_xhat,
                         double tol = 1e-9);

// ---------------------------------------------------------------------------
// Error bounds

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// B_R^{d}(x_delta, xhat) with d = -A^T w against e/alpha + delta^2/alpha + alpha |w|^2.
/// Throws if the certificate was not found to `certificate_tol`.
BoundCheck verify_bregman_bound(const Functional& r, const SourceCertificate& certificate, const Vector& x_delta,
                                const Vector& xhat, double e_delta, double delta, double alpha,
                                double certificate_tol = 1e-8);

/// |x_delta - xhat|^2 against
/// e/(gamma gamma_delta) + delta^2/(2 gamma^2 gamma_delta) + alpha^2 |w|^2/(2 gamma^2 gamma_delta).
BoundCheck verify_strong_estimate(const Vector& x_delta, const Vector& xhat, double e_delta, double delta,
                                  double alpha, double gamma, double gamma_delta, double w_norm);

/// The norm-squared special case delta^2/(2 alpha) + alpha |w|^2 / 2.
double tikhonov_error_bound(double delta, double alpha, double w_norm);

// ---------------------------------------------------------------------------
// Fidelity conditions for nonlinear problems

struct FidelityReport {
  /// min over pairs of E(w) + |E'(z - w)|^p - E(z)/C.
  double holder_min_slack = kInfinity;
  std::optional<std::pair<Vector, Vector>> holder_violation;
  /// min over v of C' delta^q - E(v) with delta = |E'(v)|.
  double noise_min_slack = kInfinity;
  int n_pairs = 0;
  bool holds = false;
};

/// Half of the pairs are independent Gaussian draws; the other half are
/// collinear (z = s w), where the constant C is tight.
FidelityReport check_fidelity_conditions(const Functional& e, Index dim, double p, double q, double c,
                                         double c_prime, int samples, std::uint64_t seed, double tol = 1e-12);

/// A C^1 map with Jacobian action v -> A'(x) v.
struct DifferentiableMap {
  std::function<Vector(const Vector&)> evaluate;
  std::function<Vector(const Vector&, const Vector&)> jacobian_action;
};

/// A linear operator viewed as a differentiable map.
DifferentiableMap as_differentiable(const LinearMap& a);

struct ApproxLinearityReport {
  double eta = 0.0;
  int n_samples = 0;
  double min_slack = kInfinity;
  std::optional<Vector> violated_at;
  double tol = 0.0;
};

/// 1/2 |A(x) - A(xhat)|^2 + <A(xhat) - b, A(x) - A(xhat) - A'(xhat)(x - xhat)>
///   >= eta |A'(xhat)(x - xhat)|^2 on samples in the ball. The Jacobian action
/// is first compared with central differences at xhat; a relative mismatch
/// above 1e-5 throws std::invalid_argument.
ApproxLinearityReport check_approximate_linearity(const DifferentiableMap& a, const Vector& xhat,
                                                  const Vector& b_delta, double eta, double radius, int samples,
                                                  std::uint64_t seed, double tol = 1e-12);

/// Largest eta in [0, eta_max] valid on the sampled points, by bisection to `resolution`.
double max_valid_eta(const DifferentiableMap& a, const Vector& xhat, const Vector& b_delta, double radius,
                     int samples, std::uint64_t seed, double eta_max = 1.0, double resolution = 1e-4);

// ---------------------------------------------------------------------------
// JSON (flat key-value objects)

nlohmann::json to_json(const SourceCertificate& c);
nlohmann::json to_json(const SubregularityReport& r);
nlohmann::json to_json(const EllipticityReport& r);
nlohmann::json to_json(const BoundCheck& r);
nlohmann::json to_json(const FidelityReport& r);
nlohmann::json to_json(const ApproxLinearityReport& r);
nlohmann::json to_json(const LassoGammaBound& r);

}  // namespace regcomplex
