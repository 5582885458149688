#include "regcomplex/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace regcomplex {

namespace {

constexpr double kNonnegSlack = 1e-12;

void require_nonnegative_weight(double weight) {
  if (!(weight >= 0.0)) throw std::invalid_argument("Functional: weight must be nonnegative");
}

void require_positive_step(const char* what, double step) {
  if (!(step > 0.0)) throw std::invalid_argument(std::string(what) + ": step must be positive");
}

Index group_count(const Functional& f, Index length) {
  if (length % f.group_size() != 0) {
    throw std::invalid_argument("GroupL21: input length " + std::to_string(length) +
                                " is not divisible by group size " + std::to_string(f.group_size()));
  }
  return length / f.group_size();
}

// Position of component j of group g.
Index group_entry(const Functional& f, Index n_groups, Index g, Index j) {
  return f.layout() == GroupLayout::Contiguous ? g * f.group_size() + j : j * n_groups + g;
}

void check_data_length(const Functional& f, const Vector& x) {
  if (f.kind() == Functional::Kind::SquaredDistanceToData) require_length("SquaredDistanceToData", x, f.data()->size());
}

// Scale each group of x by factor(group norm).
template <typename Factor>
Vector scale_groups(const Functional& f, const Vector& x, Factor factor) {
  const Index n_groups = group_count(f, x.size());
  const Vector norms = group_norms(f, x);
  Vector out(x.size());
  for (Index g = 0; g < n_groups; ++g) {
    const double s = factor(norms[g]);
    for (Index j = 0; j < f.group_size(); ++j) {
      const Index k = group_entry(f, n_groups, g, j);
      out[k] = s * x[k];
    }
  }
  return out;
}

bool within(double lhs, double rhs, double tol) { return lhs <= rhs + tol; }

}  // namespace

Functional Functional::squared_norm(double weight) {
  require_nonnegative_weight(weight);
  return Functional(Kind::SquaredNorm, weight);
}

Functional Functional::l1(double weight) {
  require_nonnegative_weight(weight);
  return Functional(Kind::L1, weight);
}

Functional Functional::group_l21(double weight, Index group_size, GroupLayout layout) {
  require_nonnegative_weight(weight);
  if (group_size <= 0) throw std::invalid_argument("GroupL21: group size must be positive");
  Functional f(Kind::GroupL21, weight);
  f.group_size_ = group_size;
  f.layout_ = layout;
  return f;
}

Functional Functional::nonneg_indicator() { return Functional(Kind::NonnegIndicator, 1.0); }

Functional Functional::squared_distance_to_data(Vector data, double weight) {
  require_nonnegative_weight(weight);
  Functional f(Kind::SquaredDistanceToData, weight);
  f.data_ = std::move(data);
  return f;
}

Functional Functional::zero() { return Functional(Kind::Zero, 0.0); }

Functional Functional::scaled(double factor) const {
  require_nonnegative_weight(factor);
  Functional f = *this;
  if (kind_ != Kind::NonnegIndicator && kind_ != Kind::Zero) f.weight_ *= factor;
  return f;
}

bool Functional::is_smooth() const {
  return kind_ == Kind::SquaredNorm || kind_ == Kind::SquaredDistanceToData || kind_ == Kind::Zero;
}

std::string to_string(Functional::Kind kind) {
  switch (kind) {
    case Functional::Kind::SquaredNorm: return "SquaredNorm";
    case Functional::Kind::L1: return "L1";
    case Functional::Kind::GroupL21: return "GroupL21";
    case Functional::Kind::NonnegIndicator: return "NonnegIndicator";
    case Functional::Kind::SquaredDistanceToData: return "SquaredDistanceToData";
    case Functional::Kind::Zero: return "Zero";
  }
  return "Unknown";
}

Vector group_norms(const Functional& f, const Vector& x) {
  if (f.kind() != Functional::Kind::GroupL21) throw std::invalid_argument("group_norms: not a GroupL21 functional");
  const Index n_groups = group_count(f, x.size());
  Vector norms = Vector::Zero(n_groups);
  for (Index g = 0; g < n_groups; ++g) {
    double sq = 0.0;
    for (Index j = 0; j < f.group_size(); ++j) {
      const double v = x[group_entry(f, n_groups, g, j)];
      sq += v * v;
    }
    norms[g] = std::sqrt(sq);
  }
  return norms;
}

double value(const Functional& f, const Vector& x) {
  check_data_length(f, x);
  const double w = f.weight();
  switch (f.kind()) {
    case Functional::Kind::SquaredNorm: return w * 0.5 * x.squaredNorm();
    case Functional::Kind::L1: return w * x.lpNorm<1>();
    case Functional::Kind::GroupL21: return w * group_norms(f, x).sum();
    case Functional::Kind::NonnegIndicator:
      return (x.size() > 0 && x.minCoeff() < -kNonnegSlack) ? kInfinity : 0.0;
    case Functional::Kind::SquaredDistanceToData: return w * 0.5 * (x - *f.data()).squaredNorm();
    case Functional::Kind::Zero: return 0.0;
  }
  throw std::logic_error("value: unhandled kind");
}

double conjugate_value(const Functional& f, const Vector& y) {
  check_data_length(f, y);
  const double w = f.weight();
  // Feasibility slack for ball/box indicators, relative to the radius.
  const double slack = 1e-9 * std::max(1.0, w);
  switch (f.kind()) {
    case Functional::Kind::SquaredNorm:
      if (w == 0.0) return y.isZero(0.0) ? 0.0 : kInfinity;
      return y.squaredNorm() / (2.0 * w);
    case Functional::Kind::L1:
      return (y.size() == 0 || within(y.lpNorm<Eigen::Infinity>(), w, slack)) ? 0.0 : kInfinity;
    case Functional::Kind::GroupL21: {
      const Vector norms = group_norms(f, y);
      return (norms.size() == 0 || within(norms.maxCoeff(), w, slack)) ? 0.0 : kInfinity;
    }
    case Functional::Kind::NonnegIndicator:
      return (y.size() == 0 || y.maxCoeff() <= kNonnegSlack) ? 0.0 : kInfinity;
    case Functional::Kind::SquaredDistanceToData:
      if (w == 0.0) return y.isZero(0.0) ? 0.0 : kInfinity;
      return y.dot(*f.data()) + y.squaredNorm() / (2.0 * w);
    case Functional::Kind::Zero: return y.isZero(0.0) ? 0.0 : kInfinity;
  }
  throw std::logic_error("conjugate_value: unhandled kind");
}

Vector prox(const Functional& f, double tau, const Vector& x) {
  require_positive_step("prox", tau);
  check_data_length(f, x);
  const double t = tau * f.weight();
  switch (f.kind()) {
    case Functional::Kind::SquaredNorm: return x / (1.0 + t);
    case Functional::Kind::L1:
      return x.unaryExpr([t](double v) { return std::copysign(std::max(std::abs(v) - t, 0.0), v); });
    case Functional::Kind::GroupL21:
      return scale_groups(f, x, [t](double norm) { return norm > t ? 1.0 - t / norm : 0.0; });
    case Functional::Kind::NonnegIndicator: return x.cwiseMax(0.0);
    case Functional::Kind::SquaredDistanceToData: return (x + t * *f.data()) / (1.0 + t);
    case Functional::Kind::Zero: return x;
  }
  throw std::logic_error("prox: no closed form for kind " + to_string(f.kind()));
}

Vector prox_conjugate(const Functional& f, double sigma, const Vector& y) {
  require_positive_step("prox_conjugate", sigma);
  check_data_length(f, y);
  const double w = f.weight();
  switch (f.kind()) {
    case Functional::Kind::SquaredNorm: return (w / (w + sigma)) * y;
    case Functional::Kind::L1: return y.cwiseMax(-w).cwiseMin(w);
    case Functional::Kind::GroupL21:
      return scale_groups(f, y, [w](double norm) { return norm > w ? w / norm : 1.0; });
    case Functional::Kind::NonnegIndicator: return y.cwiseMin(0.0);
    case Functional::Kind::SquaredDistanceToData: return (w / (w + sigma)) * (y - sigma * *f.data());
    case Functional::Kind::Zero: return Vector::Zero(y.size());
  }
  throw std::logic_error("prox_conjugate: no closed form for kind " + to_string(f.kind()));
}

Vector gradient(const Functional& f, const Vector& x) {
  check_data_length(f, x);
  switch (f.kind()) {
    case Functional::Kind::SquaredNorm: return f.weight() * x;
    case Functional::Kind::SquaredDistanceToData: return f.weight() * (x - *f.data());
    case Functional::Kind::Zero: return Vector::Zero(x.size());
    default:
      throw std::invalid_argument("gradient: " + to_string(f.kind()) + " is not differentiable");
  }
}

bool sign_set_membership(const Vector& x, const Vector& d, double tol) {
  if (x.size() != d.size()) return false;
  for (Index k = 0; k < x.size(); ++k) {
    if (x[k] > tol) {
      if (std::abs(d[k] - 1.0) > tol) return false;
    } else if (x[k] < -tol) {
      if (std::abs(d[k] + 1.0) > tol) return false;
    } else if (std::abs(d[k]) > 1.0 + tol) {
      return false;
    }
  }
  return true;
}

double bregman_divergence(const Functional& f, const Subgradient& d, const Vector& x, const Vector& xhat,
                          double tol) {
  require_length("bregman_divergence (subgradient)", d.vector, xhat.size());
  require_length("bregman_divergence (point)", x, xhat.size());
  const double w = f.weight();
  switch (f.kind()) {
    case Functional::Kind::L1: {
      const bool ok = w > 0.0 ? sign_set_membership(xhat, d.vector / w, tol)
                              : d.vector.lpNorm<Eigen::Infinity>() <= tol;
      if (!ok) throw std::invalid_argument("bregman_divergence: d is not in the l1 subdifferential at xhat");
      break;
    }
    case Functional::Kind::SquaredNorm: {
      const Vector expected = w * xhat;
      const double scale = 1.0 + expected.lpNorm<Eigen::Infinity>();
      if ((d.vector - expected).lpNorm<Eigen::Infinity>() > tol * scale) {
        throw std::invalid_argument("bregman_divergence: d is not the gradient of the squared norm at xhat");
      }
      break;
    }
    default: break;
  }
  return d.vector.dot(xhat - x) + value(f, x) - value(f, xhat);
}

}  // namespace regcomplex
