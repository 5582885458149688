#include "regcomplex/diagnostics.hpp"
#include "regcomplex/parallel.hpp"
#include "regcomplex/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace regcomplex {

namespace {

// Index of the first minimum; ties resolve to the lowest index so that the
// result does not depend on evaluation order.
std::size_t argmin_first(const std::vector<double>& values, const std::vector<char>& use) {
  std::size_t best = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!use[i]) continue;
    if (best == values.size() || values[i] < values[best]) best = i;
  }
  return best;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

SourceCertificate find_l1_certificate(const LinearMap& a, const Vector& xhat, double tol, int max_iter,
                                      double sign_tol) {
  require_length("find_l1_certificate xhat", xhat, a.domain_dim());
  auto project = [&](const Vector& v) {
    Vector p(v.size());
    for (Index k = 0; k < v.size(); ++k) {
      if (xhat[k] > sign_tol) p[k] = 1.0;
      else if (xhat[k] < -sign_tol) p[k] = -1.0;
      else p[k] = std::clamp(v[k], -1.0, 1.0);
    }
    return p;
  };

  const double norm = estimate_norm(a, 1e-12, 10000).value;
  const double lipschitz = norm * norm * (1.0 + 1e-9);

  SourceCertificate cert;
  cert.w = Vector::Zero(a.codomain_dim());
  for (int it = 0;; ++it) {
    const Vector v = -a.adjoint_apply(cert.w);
    const Vector r = v - project(v);
    cert.residual = r.norm();
    cert.residual_history.push_back(cert.residual);
    cert.iterations = it;
    if (cert.residual <= tol || it == max_iter || lipschitz == 0.0) break;
    cert.w += a.apply(r) / lipschitz;
  }
  cert.d = -a.adjoint_apply(cert.w);
  cert.found = cert.residual <= tol;
  return cert;
}

Complementarity strict_complementarity(const Vector& xhat, const Vector& d, double tol) {
  if (!sign_set_membership(xhat, d, tol)) {
    throw std::invalid_argument("strict_complementarity: d is not in Sign(xhat)");
  }
  Complementarity out;
  bool all_zero_in_z = true;
  for (Index k = 0; k < xhat.size(); ++k) {
    if (std::abs(xhat[k]) > tol) continue;
    if (std::abs(d[k]) < 1.0 - tol) out.z.push_back(k);
    else all_zero_in_z = false;
  }
  out.strictly_complementary = all_zero_in_z;
  return out;
}

Matrix lasso_m_matrix(const Matrix& a, const std::vector<Index>& z) {
  Matrix m = a.transpose() * a;
  for (Index k : z) {
    if (k < 0 || k >= m.rows()) {
      throw std::out_of_range("lasso_m_matrix: index " + std::to_string(k) + " outside [0, " +
                              std::to_string(m.rows()) + ")");
    }
    m(k, k) += 1.0;
  }
  return m;
}

LassoGammaBound lasso_admissible_gamma(const Matrix& a, const Vector& xhat, const Vector& d, double radius,
                                       double tol) {
  if (!(radius > 0.0)) throw std::invalid_argument("lasso_admissible_gamma: radius must be positive");
  LassoGammaBound out;
  out.z = strict_complementarity(xhat, d, tol).z;
  out.rho = xhat.lpNorm<Eigen::Infinity>() + radius;
  for (Index k : out.z) out.beta0 = std::min(out.beta0, (1.0 - std::abs(d[k])) / out.rho);
  out.beta = std::min(1.0, out.beta0);
  out.lambda_min = smallest_nonzero_eigenvalue(lasso_m_matrix(a, out.z));
  out.gamma_sup = std::min(0.5, out.beta * out.lambda_min);
  return out;
}

SetDistance segment_distance(Vector p, Vector q) {
  if (p.size() != q.size()) throw DimensionError("segment_distance", p.size(), q.size());
  return [p = std::move(p), q = std::move(q)](const Vector& x) {
    const Vector dir = q - p;
    const double len2 = dir.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((x - p).dot(dir) / len2, 0.0, 1.0) : 0.0;
    return (x - (p + t * dir)).norm();
  };
}

SubregularityReport check_strong_subdiff_sampled(const SubdiffCheck& check) {
  if (!(check.gamma > 0.0 && check.gamma < 0.5)) {
    throw std::invalid_argument("check_strong_subdiff_sampled: gamma must lie in (0, 1/2)");
  }
  if (!(check.gamma_delta > 0.0)) throw std::invalid_argument("check_strong_subdiff_sampled: gamma_delta must be positive");
  if (!(check.radius > 0.0)) throw std::invalid_argument("check_strong_subdiff_sampled: radius must be positive");
  if (check.n_samples < 0) throw std::invalid_argument("check_strong_subdiff_sampled: n_samples must be nonnegative");
  if (check.target == SubregTarget::SemiStrongDist && !check.distance) {
    throw std::invalid_argument("check_strong_subdiff_sampled: SemiStrongDist needs a set distance");
  }
  require_length("check_strong_subdiff_sampled xhat", check.xhat, check.a.domain_dim());
  require_length("check_strong_subdiff_sampled d", check.d, check.a.domain_dim());

  const double r_hat = value(check.r, check.xhat);
  const std::size_t n_random = static_cast<std::size_t>(check.n_samples);
  const std::size_t total = n_random + check.probe_points.size();
  std::vector<double> slack(total, kInfinity);
  std::vector<char> used(total, 0);
  std::vector<Vector> points(total);

  parallel_for(total, [&](std::size_t i) {
    Vector x;
    if (i < n_random) {
      Xoshiro256 rng(derive_seed(check.seed, i));
      x = sample_ball(check.xhat, check.radius, rng);
    } else {
      x = check.probe_points[i - n_random];
      require_length("check_strong_subdiff_sampled probe", x, check.xhat.size());
    }
    const double r_x = value(check.r, x);
    if (check.rho && r_x > r_hat + *check.rho) return;
    const Vector dx = x - check.xhat;
    const double growth = check.alpha * (r_x - r_hat - check.d.dot(dx)) +
                          (0.5 - check.gamma) * check.a.apply(dx).squaredNorm();
    const double target = check.target == SubregTarget::StrongNorm ? dx.squaredNorm()
                                                                    : std::pow(check.distance(x), 2);
    slack[i] = growth - check.gamma * check.gamma_delta * target;
    used[i] = 1;
    points[i] = std::move(x);
  });

  SubregularityReport report;
  report.gamma_tested = check.gamma;
  report.tol = check.tol;
  for (char u : used) u ? ++report.n_samples : ++report.n_filtered;
  const std::size_t worst = argmin_first(slack, used);
  if (worst < total) {
    report.min_slack = slack[worst];
    if (report.min_slack <= -check.tol) report.violated_at = points[worst];
  }
  return report;
}

namespace {

// Power iteration for the largest eigenvalue of a symmetric PSD operator.
double largest_eigenvalue(const std::function<Vector(const Vector&)>& op, Index n, int max_iter, double rel_tol,
                          std::uint64_t seed, bool& converged) {
  Xoshiro256 rng(seed);
  Vector v = standard_normals(n, rng);
  v.normalize();
  double lambda = 0.0;
  converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const Vector w = op(v);
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) {
      converged = true;
      return 0.0;
    }
    v = w / wn;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      converged = true;
      return next;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace

EllipticityReport check_tv_ellipticity(const LinearMap& a, const FlatAreaCollection& collection, Index width,
                                       Index height, double tol) {
  const Index n = width * height;
  if (a.domain_dim() != n) throw DimensionError("check_tv_ellipticity operator domain", n, a.domain_dim());
  const LinearMap centring = make_centring(collection, width, height);
  EllipticityReport report;
  if (n <= 400) {
    const Matrix c = to_dense(centring);
    const Matrix ad = to_dense(a);
    const Matrix m = c.transpose() * c + ad.transpose() * ad;
    report.epsilon = jacobi_eigenvalues(0.5 * (m + m.transpose())).minCoeff();
    report.method = "dense-jacobi";
  } else {
    auto apply_m = [&](const Vector& x) {
      return Vector(centring.adjoint_apply(centring.apply(x)) + a.adjoint_apply(a.apply(x)));
    };
    bool ok_max = false, ok_shift = false;
    const double lambda_max = largest_eigenvalue(apply_m, n, 20000, 1e-12, 1, ok_max);
    auto shifted = [&](const Vector& x) { return Vector(lambda_max * x - apply_m(x)); };
    const double mu = largest_eigenvalue(shifted, n, 20000, 1e-12, 2, ok_shift);
    report.epsilon = lambda_max - mu;
    report.converged = ok_max && ok_shift;
    report.method = "shifted-power";
  }
  report.holds = report.epsilon > tol;
  return report;
}

bool strictly_flat_check(const Vector& phi, const FlatAreaCollection& collection, const Vector& grad_xhat,
                         double tol) {
  if (phi.size() % 2 != 0) throw std::invalid_argument("strictly_flat_check: phi must hold two components per pixel");
  const Index n = phi.size() / 2;
  require_length("strictly_flat_check grad_xhat", grad_xhat, phi.size());
  collection.validate(n);
  for (Index p = 0; p < n; ++p) {
    if (std::hypot(phi[p], phi[n + p]) > 1.0 + tol) {
      throw std::invalid_argument("strictly_flat_check: |phi| exceeds 1 at pixel " + std::to_string(p));
    }
  }
  for (const auto& region : collection.regions) {
    for (Index p : region) {
      if (std::abs(grad_xhat[p]) > tol || std::abs(grad_xhat[n + p]) > tol) return false;
      if (std::hypot(phi[p], phi[n + p]) > 1.0 - tol) return false;
    }
  }
  return true;
}

BoundCheck verify_bregman_bound(const Functional& r, const SourceCertificate& certificate, const Vector& x_delta,
                                const Vector& xhat, double e_delta, double delta, double alpha,
                                double certificate_tol) {
  if (!certificate.found || !(certificate.residual <= certificate_tol)) {
    throw std::invalid_argument("verify_bregman_bound: certificate residual " + std::to_string(certificate.residual) +
                                " exceeds " + std::to_string(certificate_tol));
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("verify_bregman_bound: alpha must be positive");
  BoundCheck out;
  out.lhs = bregman_divergence(r, {certificate.d}, x_delta, xhat, std::max(1e-9, 10.0 * certificate_tol));
  out.rhs = e_delta / alpha + delta * delta / alpha + alpha * certificate.w.squaredNorm();
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

BoundCheck verify_strong_estimate(const Vector& x_delta, const Vector& xhat, double e_delta, double delta,
                                  double alpha, double gamma, double gamma_delta, double w_norm) {
  if (!(gamma > 0.0) || !(gamma_delta > 0.0)) {
    throw std::invalid_argument("verify_strong_estimate: gamma and gamma_delta must be positive");
  }
  BoundCheck out;
  out.lhs = (x_delta - xhat).squaredNorm();
  const double g2 = 2.0 * gamma * gamma * gamma_delta;
  out.rhs = e_delta / (gamma * gamma_delta) + delta * delta / g2 + alpha * alpha * w_norm * w_norm / g2;
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

double tikhonov_error_bound(double delta, double alpha, double w_norm) {
  if (!(alpha > 0.0)) throw std::invalid_argument("tikhonov_error_bound: alpha must be positive");
  return delta * delta / (2.0 * alpha) + 0.5 * alpha * w_norm * w_norm;
}

FidelityReport check_fidelity_conditions(const Functional& e, Index dim, double p, double q, double c,
                                         double c_prime, int samples, std::uint64_t seed, double tol) {
  if (!e.is_smooth()) throw std::invalid_argument("check_fidelity_conditions: E must be smooth");
  if (!(c > 0.0) || !(p > 0.0) || !(q > 0.0) || !(c_prime > 0.0)) {
    throw std::invalid_argument("check_fidelity_conditions: C, C', p, q must be positive");
  }
  if (dim <= 0 || samples <= 0) throw std::invalid_argument("check_fidelity_conditions: need dim > 0 and samples > 0");

  const std::size_t count = static_cast<std::size_t>(samples);
  std::vector<double> holder(count), noise(count);
  std::vector<Vector> zs(count), ws(count);
  parallel_for(count, [&](std::size_t i) {
    Xoshiro256 rng(derive_seed(seed, i));
    Vector w = std::exp(rng.normal()) * standard_normals(dim, rng);
    Vector z = i % 2 == 0 ? Vector(std::exp(rng.normal()) * standard_normals(dim, rng))
                          : Vector((8.0 * rng.uniform() - 4.0) * w);
    holder[i] = value(e, w) + std::pow(gradient(e, z - w).norm(), p) - value(e, z) / c;
    const double delta = gradient(e, z).norm();
    noise[i] = c_prime * std::pow(delta, q) - value(e, z);
    zs[i] = std::move(z);
    ws[i] = std::move(w);
  });

  FidelityReport report;
  report.n_pairs = samples;
  const std::vector<char> all(count, 1);
  const std::size_t worst = argmin_first(holder, all);
  report.holder_min_slack = holder[worst];
  if (report.holder_min_slack < -tol) report.holder_violation = std::make_pair(zs[worst], ws[worst]);
  report.noise_min_slack = *std::min_element(noise.begin(), noise.end());
  report.holds = report.holder_min_slack >= -tol && report.noise_min_slack >= -tol;
  return report;
}

DifferentiableMap as_differentiable(const LinearMap& a) {
  return {[a](const Vector& x) { return a.apply(x); }, [a](const Vector&, const Vector& v) { return a.apply(v); }};
}

namespace {

struct LinearitySamples {
  std::vector<Vector> points;
  std::vector<double> lhs;   // 1/2 |A(x) - A(xhat)|^2 + <A(xhat) - b, remainder>
  std::vector<double> quad;  // |A'(xhat)(x - xhat)|^2
};

LinearitySamples sample_linearity(const DifferentiableMap& a, const Vector& xhat, const Vector& b_delta,
                                  double radius, int samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("check_approximate_linearity: radius must be positive");
  if (samples <= 0) throw std::invalid_argument("check_approximate_linearity: samples must be positive");
  const Vector a_hat = a.evaluate(xhat);
  require_length("check_approximate_linearity b_delta", b_delta, a_hat.size());

  // Jacobian consistency against central differences.
  Xoshiro256 probe(derive_seed(seed, ~std::uint64_t{0}));
  const double h = 1e-6 * std::max(1.0, xhat.norm());
  for (int t = 0; t < 3; ++t) {
    Vector v = standard_normals(xhat.size(), probe);
    v.normalize();
    const Vector fd = (a.evaluate(xhat + h * v) - a.evaluate(xhat - h * v)) / (2.0 * h);
    const Vector jv = a.jacobian_action(xhat, v);
    if ((fd - jv).norm() > 1e-5 * std::max(1.0, jv.norm())) {
      throw std::invalid_argument("check_approximate_linearity: Jacobian action disagrees with finite differences");
    }
  }

  LinearitySamples out;
  const std::size_t count = static_cast<std::size_t>(samples);
  out.points.resize(count);
  out.lhs.resize(count);
  out.quad.resize(count);
  const Vector offset = a_hat - b_delta;
  parallel_for(count, [&](std::size_t i) {
    Xoshiro256 rng(derive_seed(seed, i));
    Vector x = sample_ball(xhat, radius, rng);
    const Vector ax = a.evaluate(x);
    const Vector lin = a.jacobian_action(xhat, x - xhat);
    out.lhs[i] = 0.5 * (ax - a_hat).squaredNorm() + offset.dot(ax - a_hat - lin);
    out.quad[i] = lin.squaredNorm();
    out.points[i] = std::move(x);
  });
  return out;
}

}  // namespace

ApproxLinearityReport check_approximate_linearity(const DifferentiableMap& a, const Vector& xhat,
                                                  const Vector& b_delta, double eta, double radius, int samples,
                                                  std::uint64_t seed, double tol) {
  const LinearitySamples s = sample_linearity(a, xhat, b_delta, radius, samples, seed);
  std::vector<double> slack(s.lhs.size());
  for (std::size_t i = 0; i < slack.size(); ++i) slack[i] = s.lhs[i] - eta * s.quad[i];
  ApproxLinearityReport report;
  report.eta = eta;
  report.tol = tol;
  report.n_samples = samples;
  const std::size_t worst = argmin_first(slack, std::vector<char>(slack.size(), 1));
  report.min_slack = slack[worst];
  if (report.min_slack <= -tol) report.violated_at = s.points[worst];
  return report;
}

double max_valid_eta(const DifferentiableMap& a, const Vector& xhat, const Vector& b_delta, double radius,
                     int samples, std::uint64_t seed, double eta_max, double resolution) {
  if (!(eta_max > 0.0) || !(resolution > 0.0)) throw std::invalid_argument("max_valid_eta: bad search interval");
  const LinearitySamples s = sample_linearity(a, xhat, b_delta, radius, samples, seed);
  auto valid = [&](double eta) {
    for (std::size_t i = 0; i < s.lhs.size(); ++i)
      if (s.lhs[i] - eta * s.quad[i] <= -1e-12) return false;
    return true;
  };
  if (!valid(0.0)) return 0.0;
  if (valid(eta_max)) return eta_max;
  double lo = 0.0, hi = eta_max;
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    (valid(mid) ? lo : hi) = mid;
  }
  return lo;
}

nlohmann::json to_json(const SourceCertificate& c) {
  return {{"w", to_std(c.w)}, {"d", to_std(c.d)}, {"residual", c.residual}, {"found", c.found},
          {"iterations", c.iterations}};
}

nlohmann::json to_json(const SubregularityReport& r) {
  nlohmann::json j = {{"gamma_tested", r.gamma_tested}, {"n_samples", r.n_samples}, {"n_filtered", r.n_filtered},
                      {"min_slack", r.min_slack},       {"tol", r.tol},             {"violated", r.violated_at.has_value()}};
  j["violated_at"] = r.violated_at ? nlohmann::json(to_std(*r.violated_at)) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const EllipticityReport& r) {
  return {{"holds", r.holds}, {"epsilon", r.epsilon}, {"converged", r.converged}, {"method", r.method}};
}

nlohmann::json to_json(const BoundCheck& r) { return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"holds", r.holds}}; }

nlohmann::json to_json(const FidelityReport& r) {
  nlohmann::json j = {{"holder_min_slack", r.holder_min_slack},
                      {"noise_min_slack", r.noise_min_slack},
                      {"n_pairs", r.n_pairs},
                      {"holds", r.holds},
                      {"holder_violated", r.holder_violation.has_value()}};
  if (r.holder_violation) {
    j["holder_violation_z"] = to_std(r.holder_violation->first);
    j["holder_violation_w"] = to_std(r.holder_violation->second);
  }
  return j;
}

nlohmann::json to_json(const ApproxLinearityReport& r) {
  nlohmann::json j = {{"eta", r.eta}, {"n_samples", r.n_samples}, {"min_slack", r.min_slack}, {"tol", r.tol},
                      {"violated", r.violated_at.has_value()}};
  j["violated_at"] = r.violated_at ? nlohmann::json(to_std(*r.violated_at)) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const LassoGammaBound& r) {
  return {{"z", r.z},          {"rho", r.rho},
          {"beta0", std::isinf(r.beta0) ? nlohmann::json(nullptr) : nlohmann::json(r.beta0)},
          {"beta", r.beta},    {"lambda_min", r.lambda_min},
          {"gamma_sup", r.gamma_sup}};
}

}  // namespace regcomplex
