#include "regcomplex/linop.hpp"
#include "regcomplex/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace regcomplex {

NormEstimate estimate_norm(const LinearMap& op, double tol, int max_iter, std::uint64_t seed) {
  if (!(tol > 0.0)) throw std::invalid_argument("estimate_norm: tol must be positive");
  Xoshiro256 rng(seed);
  Vector v = standard_normals(op.domain_dim(), rng);
  v.normalize();

  NormEstimate est;
  double previous = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = op.adjoint_apply(op.apply(v));
    const double rayleigh = v.dot(w);
    const double wnorm = w.norm();
    est.iterations = it;
    est.value = std::sqrt(std::max(rayleigh, 0.0));
    if (wnorm == 0.0) {
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    if (previous >= 0.0 && std::abs(rayleigh - previous) < tol) {
      est.converged = true;
      return est;
    }
    previous = rayleigh;
    v = w / wnorm;
  }
  return est;
}

Vector jacobi_eigenvalues(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("jacobi_eigenvalues: matrix must be square");
  const Index n = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw std::invalid_argument("jacobi_eigenvalues: matrix is not symmetric");
  }

  Matrix a = 0.5 * (m + m.transpose());
  const double frob = a.norm();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * frob || off == 0.0) break;

    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p, q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector eig = a.diagonal();
  std::sort(eig.begin(), eig.end());
  return eig;
}

double smallest_nonzero_eigenvalue(const Matrix& m, double tol) {
  const Vector eig = jacobi_eigenvalues(m, tol);
  if (eig.size() == 0) throw std::invalid_argument("smallest_nonzero_eigenvalue: empty matrix");
  const double lambda_max = eig.maxCoeff();
  if (lambda_max <= tol) throw std::invalid_argument("smallest_nonzero_eigenvalue: zero operator");
  if (eig.minCoeff() < -tol * std::max(1.0, lambda_max)) {
    throw std::invalid_argument("smallest_nonzero_eigenvalue: matrix is not positive semidefinite");
  }
  const double threshold = tol * lambda_max;
  double best = lambda_max;
  for (double e : eig)
    if (e > threshold) best = std::min(best, e);
  return best;
}

}  // namespace regcomplex
