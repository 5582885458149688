#pragma once

#include "regcomplex/types.hpp"

#include <optional>
#include <string>

namespace regcomplex {

/// How GroupL21 partitions its input into groups of `group_size` entries.
///
/// Contiguous: group g is entries [g * group_size, (g + 1) * group_size).
/// Planar: component j of group g sits at j * n_groups + g. This matches the
/// Grad2D layout (all x-differences, then all y-differences), so that each
/// group collects the gradient vector of one pixel.
enum class GroupLayout { Contiguous, Planar };

/// A weighted convex term: weight * base(x).
///
///   SquaredNorm            base(x) = 1/2 |x|^2
///   L1                     base(x) = |x|_1
///   GroupL21               base(x) = sum over groups of |x_g|_2
///   NonnegIndicator        0 if x >= 0 (to -1e-12), +inf otherwise; weight ignored
///   SquaredDistanceToData  base(x) = 1/2 |x - data|^2
///   Zero                   base(x) = 0
class Functional {
 public:
  enum class Kind { SquaredNorm, L1, GroupL21, NonnegIndicator, SquaredDistanceToData, Zero };

  static Functional squared_norm(double weight = 1.0);
  static Functional l1(double weight = 1.0);
  static Functional group_l21(double weight, Index group_size, GroupLayout layout = GroupLayout::Contiguous);
  static Functional nonneg_indicator();
  static Functional squared_distance_to_data(Vector data, double weight = 1.0);
  static Functional zero();

  Kind kind() const { return kind_; }
  double weight() const { return weight_; }
  const std::optional<Vector>& data() const { return data_; }
  Index group_size() const { return group_size_; }
  GroupLayout layout() const { return layout_; }

  /// The same functional with its weight multiplied by `factor` (>= 0).
  Functional scaled(double factor) const;
  bool is_smooth() const;

 private:
  Functional(Kind kind, double weight) : kind_(kind), weight_(weight) {}

  Kind kind_;
  double weight_;
  std::optional<Vector> data_;
  Index group_size_ = 1;
  GroupLayout layout_ = GroupLayout::Contiguous;
};

std::string to_string(Functional::Kind kind);

/// A selected element of a subdifferential.
struct Subgradient {
  Vector vector;
};

/// Euclidean norm of every group of a GroupL21 functional's input.
Vector group_norms(const Functional& f, const Vector& x);

/// f(x); may be +infinity for indicators.
double value(const Functional& f, const Vector& x);

/// Fenchel conjugate f*(y); +infinity outside the conjugate's domain.
double conjugate_value(const Functional& f, const Vector& y);

/// argmin_z 1/2 |z - x|^2 + tau f(z), in closed form.
Vector prox(const Functional& f, double tau, const Vector& x);

/// prox of sigma f*, in closed form for every kind (projections for the
/// norm-type kinds). Satisfies the Moreau identity with prox().
Vector prox_conjugate(const Functional& f, double sigma, const Vector& y);

/// Gradient of a smooth kind; throws std::invalid_argument otherwise.
Vector gradient(const Functional& f, const Vector& x);

/// <d, xhat - x> + f(x) - f(xhat). Membership d in the subdifferential of f
/// at xhat is checked to `tol` for L1 and SquaredNorm; other kinds are trusted.
double bregman_divergence(const Functional& f, const Subgradient& d, const Vector& x, const Vector& xhat,
                          double tol = 1e-9);

/// True iff d lies in the l1 subdifferential (Sign set) of x, to `tol`.
bool sign_set_membership(const Vector& x, const Vector& d, double tol = 1e-9);

}  // namespace regcomplex
