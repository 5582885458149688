#pragma once

#include "regcomplex/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace regcomplex {

/// Greyscale image on a uniform grid with unit cell width, flattened
/// row-major: pixel (row, col) lives at row * width + col.
struct ImageGrid {
  Index width = 0;
  Index height = 0;
  Vector values;
  double cell_width = 1.0;

  ImageGrid() = default;
  ImageGrid(Index width, Index height, Vector values);
  static ImageGrid filled(Index width, Index height, double value);

  Index size() const { return width * height; }
  Index index(Index row, Index col) const { return row * width + col; }
  double at(Index row, Index col) const { return values[index(row, col)]; }
};

/// Disjoint, nonempty pixel index sets. Region order and the pixel order
/// inside each region fix the layout of the centring operator's output.
struct FlatAreaCollection {
  std::vector<std::vector<Index>> regions;

  /// Throws std::invalid_argument unless the regions are nonempty, pairwise
  /// disjoint and index into a grid of `grid_size` pixels.
  void validate(Index grid_size) const;
  Index total_size() const;
};

namespace detail {

class LinearMapImpl {
 public:
  virtual ~LinearMapImpl() = default;
  virtual Index domain_dim() const = 0;
  virtual Index codomain_dim() const = 0;
  virtual void apply(const Vector& x, Vector& y) const = 0;
  virtual void adjoint_apply(const Vector& y, Vector& x) const = 0;
};

}  // namespace detail

/// An immutable linear operator between flattened real vector spaces.
///
/// Copies share the underlying implementation, so a LinearMap is cheap to
/// pass by value and safe to use from several threads at once.
class LinearMap {
 public:
  enum class Kind { Dense, Blur2D, Grad2D, Stack, Centring, Identity, Zero, Scaled };

  LinearMap(Kind kind, std::shared_ptr<const detail::LinearMapImpl> impl);

  Kind kind() const { return kind_; }
  Index domain_dim() const { return impl_->domain_dim(); }
  Index codomain_dim() const { return impl_->codomain_dim(); }

  /// op * x. Throws DimensionError if x.size() != domain_dim().
  Vector apply(const Vector& x) const;
  /// op^T * y. Throws DimensionError if y.size() != codomain_dim().
  Vector adjoint_apply(const Vector& y) const;

 private:
  Kind kind_;
  std::shared_ptr<const detail::LinearMapImpl> impl_;
};

std::string to_string(LinearMap::Kind kind);

LinearMap make_identity(Index n);
LinearMap make_zero(Index domain_dim, Index codomain_dim);
LinearMap make_dense(Matrix m);
LinearMap make_scaled(double factor, const LinearMap& op);

/// Normalised Gaussian kernel on a window x window stencil, row-major.
Matrix gaussian_kernel(double std_dev, int window);

/// Convolution with gaussian_kernel(std_dev, window) using symmetric (mirror)
/// padding, so constant images are fixed points.
LinearMap make_gaussian_blur(Index width, Index height, double std_dev, int window);

/// Forward differences with Neumann boundary. The codomain holds all
/// horizontal differences followed by all vertical differences.
LinearMap make_grad2d(Index width, Index height);

/// K x = (A x, Q x).
LinearMap make_stack(const LinearMap& a, const LinearMap& q);

/// Per-region mean subtraction restricted to the union of the regions.
LinearMap make_centring(const FlatAreaCollection& collection, Index width, Index height);

/// Materialise an operator as a dense matrix by applying it to unit vectors.
Matrix to_dense(const LinearMap& op);

struct NormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Power iteration on op^T op. Converged once successive Rayleigh quotients
/// differ by less than `tol`.
NormEstimate estimate_norm(const LinearMap& op, double tol = 1e-6, int max_iter = 1000,
                           std::uint64_t seed = 0);

/// All eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi
/// rotations. Throws std::invalid_argument if `m` is not symmetric to `tol`.
Vector jacobi_eigenvalues(const Matrix& m, double tol = 1e-10);

/// Smallest eigenvalue exceeding tol * lambda_max of a symmetric PSD matrix.
double smallest_nonzero_eigenvalue(const Matrix& m, double tol = 1e-10);

}  // namespace regcomplex
