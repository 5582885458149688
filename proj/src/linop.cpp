#include "regcomplex/linop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace regcomplex {

ImageGrid::ImageGrid(Index width_, Index height_, Vector values_)
    : width(width_), height(height_), values(std::move(values_)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("ImageGrid: dimensions must be positive");
  require_length("ImageGrid values", values, width * height);
}

ImageGrid ImageGrid::filled(Index width, Index height, double value) {
  return ImageGrid(width, height, Vector::Constant(width * height, value));
}

void FlatAreaCollection::validate(Index grid_size) const {
  std::vector<bool> seen(static_cast<std::size_t>(grid_size), false);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (regions[r].empty()) {
      throw std::invalid_argument("FlatAreaCollection: region " + std::to_string(r) + " is empty");
    }
    for (Index p : regions[r]) {
      if (p < 0 || p >= grid_size) {
        throw std::invalid_argument("FlatAreaCollection: pixel index " + std::to_string(p) +
                                    " outside grid of " + std::to_string(grid_size));
      }
      if (seen[static_cast<std::size_t>(p)]) {
        throw std::invalid_argument("FlatAreaCollection: pixel " + std::to_string(p) +
                                    " belongs to more than one region");
      }
      seen[static_cast<std::size_t>(p)] = true;
    }
  }
}

Index FlatAreaCollection::total_size() const {
  Index n = 0;
  for (const auto& r : regions) n += static_cast<Index>(r.size());
  return n;
}

LinearMap::LinearMap(Kind kind, std::shared_ptr<const detail::LinearMapImpl> impl)
    : kind_(kind), impl_(std::move(impl)) {}

Vector LinearMap::apply(const Vector& x) const {
  require_length("LinearMap::apply", x, domain_dim());
  Vector y = Vector::Zero(codomain_dim());
  impl_->apply(x, y);
  return y;
}

Vector LinearMap::adjoint_apply(const Vector& y) const {
  require_length("LinearMap::adjoint_apply", y, codomain_dim());
  Vector x = Vector::Zero(domain_dim());
  impl_->adjoint_apply(y, x);
  return x;
}

std::string to_string(LinearMap::Kind kind) {
  switch (kind) {
    case LinearMap::Kind::Dense: return "Dense";
    case LinearMap::Kind::Blur2D: return "Blur2D";
    case LinearMap::Kind::Grad2D: return "Grad2D";
    case LinearMap::Kind::Stack: return "Stack";
    case LinearMap::Kind::Centring: return "Centring";
    case LinearMap::Kind::Identity: return "Identity";
    case LinearMap::Kind::Zero: return "Zero";
    case LinearMap::Kind::Scaled: return "Scaled";
  }
  return "Unknown";
}

namespace {

void require_positive(const char* what, Index n) {
  if (n <= 0) throw std::invalid_argument(std::string(what) + ": dimension must be positive");
}

class IdentityImpl final : public detail::LinearMapImpl {
 public:
  explicit IdentityImpl(Index n) : n_(n) {}
  Index domain_dim() const override { return n_; }
  Index codomain_dim() const override { return n_; }
  void apply(const Vector& x, Vector& y) const override { y = x; }
  void adjoint_apply(const Vector& y, Vector& x) const override { x = y; }

 private:
  Index n_;
};

class ZeroImpl final : public detail::LinearMapImpl {
 public:
  ZeroImpl(Index domain, Index codomain) : domain_(domain), codomain_(codomain) {}
  Index domain_dim() const override { return domain_; }
  Index codomain_dim() const override { return codomain_; }
  void apply(const Vector&, Vector& y) const override { y.setZero(); }
  void adjoint_apply(const Vector&, Vector& x) const override { x.setZero(); }

 private:
  Index domain_;
  Index codomain_;
};

class DenseImpl final : public detail::LinearMapImpl {
 public:
  explicit DenseImpl(Matrix m) : m_(std::move(m)) {}
  Index domain_dim() const override { return m_.cols(); }
  Index codomain_dim() const override { return m_.rows(); }
  void apply(const Vector& x, Vector& y) const override { y.noalias() = m_ * x; }
  void adjoint_apply(const Vector& y, Vector& x) const override { x.noalias() = m_.transpose() * y; }

 private:
  Matrix m_;
};

class ScaledImpl final : public detail::LinearMapImpl {
 public:
  ScaledImpl(double factor, LinearMap op) : factor_(factor), op_(std::move(op)) {}
  Index domain_dim() const override { return op_.domain_dim(); }
  Index codomain_dim() const override { return op_.codomain_dim(); }
  void apply(const Vector& x, Vector& y) const override { y = factor_ * op_.apply(x); }
  void adjoint_apply(const Vector& y, Vector& x) const override { x = factor_ * op_.adjoint_apply(y); }

 private:
  double factor_;
  LinearMap op_;
};

// Half-sample symmetric reflection: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
Index mirror(Index i, Index n) {
  const Index period = 2 * n;
  Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

class BlurImpl final : public detail::LinearMapImpl {
 public:
  BlurImpl(Index width, Index height, const Matrix& kernel)
      : width_(width), height_(height), size_(kernel.rows()) {
    const Index half = size_ / 2;
    weights_.resize(static_cast<std::size_t>(size_ * size_));
    for (Index i = 0; i < size_; ++i)
      for (Index j = 0; j < size_; ++j) weights_[static_cast<std::size_t>(i * size_ + j)] = kernel(i, j);
    // Mirrored source rows and columns for every output position and tap.
    rows_.resize(static_cast<std::size_t>(height_ * size_));
    cols_.resize(static_cast<std::size_t>(width_ * size_));
    for (Index r = 0; r < height_; ++r)
      for (Index i = 0; i < size_; ++i) rows_[static_cast<std::size_t>(r * size_ + i)] = mirror(r + i - half, height_) * width_;
    for (Index c = 0; c < width_; ++c)
      for (Index j = 0; j < size_; ++j) cols_[static_cast<std::size_t>(c * size_ + j)] = mirror(c + j - half, width_);
  }
  Index domain_dim() const override { return width_ * height_; }
  Index codomain_dim() const override { return width_ * height_; }

  void apply(const Vector& x, Vector& y) const override {
    for (Index r = 0; r < height_; ++r) {
      const Index* rows = &rows_[static_cast<std::size_t>(r * size_)];
      for (Index c = 0; c < width_; ++c) {
        const Index* cols = &cols_[static_cast<std::size_t>(c * size_)];
        double acc = 0.0;
        for (Index i = 0; i < size_; ++i) {
          const double* src = x.data() + rows[i];
          const double* w = &weights_[static_cast<std::size_t>(i * size_)];
          for (Index j = 0; j < size_; ++j) acc += w[j] * src[cols[j]];
        }
        y[r * width_ + c] = acc;
      }
    }
  }

  void adjoint_apply(const Vector& y, Vector& x) const override {
    x.setZero();
    for (Index r = 0; r < height_; ++r) {
      const Index* rows = &rows_[static_cast<std::size_t>(r * size_)];
      for (Index c = 0; c < width_; ++c) {
        const Index* cols = &cols_[static_cast<std::size_t>(c * size_)];
        const double v = y[r * width_ + c];
        for (Index i = 0; i < size_; ++i) {
          double* dst = x.data() + rows[i];
          const double* w = &weights_[static_cast<std::size_t>(i * size_)];
          for (Index j = 0; j < size_; ++j) dst[cols[j]] += w[j] * v;
        }
      }
    }
  }

 private:
  Index width_;
  Index height_;
  Index size_;
  std::vector<double> weights_;  // row-major kernel
  std::vector<Index> rows_;      // offset of the mirrored source row
  std::vector<Index> cols_;
};

class GradImpl final : public detail::LinearMapImpl {
 public:
  GradImpl(Index width, Index height) : width_(width), height_(height) {}
  Index domain_dim() const override { return width_ * height_; }
  Index codomain_dim() const override { return 2 * width_ * height_; }

  void apply(const Vector& x, Vector& y) const override {
    const Index n = width_ * height_;
    for (Index r = 0; r < height_; ++r) {
      for (Index c = 0; c < width_; ++c) {
        const Index p = r * width_ + c;
        y[p] = c + 1 < width_ ? x[p + 1] - x[p] : 0.0;
        y[n + p] = r + 1 < height_ ? x[p + width_] - x[p] : 0.0;
      }
    }
  }

  // Negative divergence of the field (y_x, y_y).
  void adjoint_apply(const Vector& y, Vector& x) const override {
    const Index n = width_ * height_;
    x.setZero();
    for (Index r = 0; r < height_; ++r) {
      for (Index c = 0; c < width_; ++c) {
        const Index p = r * width_ + c;
        if (c + 1 < width_) {
          x[p] -= y[p];
          x[p + 1] += y[p];
        }
        if (r + 1 < height_) {
          x[p] -= y[n + p];
          x[p + width_] += y[n + p];
        }
      }
    }
  }

 private:
  Index width_;
  Index height_;
};

class StackImpl final : public detail::LinearMapImpl {
 public:
  StackImpl(LinearMap a, LinearMap q) : a_(std::move(a)), q_(std::move(q)) {}
  Index domain_dim() const override { return a_.domain_dim(); }
  Index codomain_dim() const override { return a_.codomain_dim() + q_.codomain_dim(); }

  void apply(const Vector& x, Vector& y) const override {
    y.head(a_.codomain_dim()) = a_.apply(x);
    y.tail(q_.codomain_dim()) = q_.apply(x);
  }

  void adjoint_apply(const Vector& y, Vector& x) const override {
    x = a_.adjoint_apply(y.head(a_.codomain_dim())) + q_.adjoint_apply(y.tail(q_.codomain_dim()));
  }

 private:
  LinearMap a_;
  LinearMap q_;
};

class CentringImpl final : public detail::LinearMapImpl {
 public:
  CentringImpl(FlatAreaCollection collection, Index grid_size)
      : collection_(std::move(collection)), grid_size_(grid_size), out_size_(collection_.total_size()) {}
  Index domain_dim() const override { return grid_size_; }
  Index codomain_dim() const override { return out_size_; }

  void apply(const Vector& x, Vector& y) const override {
    Index offset = 0;
    for (const auto& region : collection_.regions) {
      double mean = 0.0;
      for (Index p : region) mean += x[p];
      mean /= static_cast<double>(region.size());
      for (Index p : region) y[offset++] = x[p] - mean;
    }
  }

  // The per-region centring matrix I - 11^T/n is symmetric, so the adjoint
  // centres y region by region and scatters it back onto the grid.
  void adjoint_apply(const Vector& y, Vector& x) const override {
    x.setZero();
    Index offset = 0;
    for (const auto& region : collection_.regions) {
      const auto count = static_cast<Index>(region.size());
      const double mean = y.segment(offset, count).mean();
      for (Index k = 0; k < count; ++k) x[region[static_cast<std::size_t>(k)]] = y[offset + k] - mean;
      offset += count;
    }
  }

 private:
  FlatAreaCollection collection_;
  Index grid_size_;
  Index out_size_;
};

}  // namespace

LinearMap make_identity(Index n) {
  require_positive("make_identity", n);
  return LinearMap(LinearMap::Kind::Identity, std::make_shared<IdentityImpl>(n));
}

LinearMap make_zero(Index domain_dim, Index codomain_dim) {
  require_positive("make_zero", domain_dim);
  require_positive("make_zero", codomain_dim);
  return LinearMap(LinearMap::Kind::Zero, std::make_shared<ZeroImpl>(domain_dim, codomain_dim));
}

LinearMap make_dense(Matrix m) {
  require_positive("make_dense", m.rows());
  require_positive("make_dense", m.cols());
  return LinearMap(LinearMap::Kind::Dense, std::make_shared<DenseImpl>(std::move(m)));
}

LinearMap make_scaled(double factor, const LinearMap& op) {
  return LinearMap(LinearMap::Kind::Scaled, std::make_shared<ScaledImpl>(factor, op));
}

Matrix gaussian_kernel(double std_dev, int window) {
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("gaussian_kernel: window must be a positive odd integer, got " +
                                std::to_string(window));
  }
  if (!(std_dev > 0.0)) throw std::invalid_argument("gaussian_kernel: std_dev must be positive");
  const int half = window / 2;
  Matrix k(window, window);
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      k(i + half, j + half) = std::exp(-(i * i + j * j) / (2.0 * std_dev * std_dev));
    }
  }
  return k / k.sum();
}

LinearMap make_gaussian_blur(Index width, Index height, double std_dev, int window) {
  require_positive("make_gaussian_blur", width);
  require_positive("make_gaussian_blur", height);
  return LinearMap(LinearMap::Kind::Blur2D,
                   std::make_shared<BlurImpl>(width, height, gaussian_kernel(std_dev, window)));
}

LinearMap make_grad2d(Index width, Index height) {
  require_positive("make_grad2d", width);
  require_positive("make_grad2d", height);
  return LinearMap(LinearMap::Kind::Grad2D, std::make_shared<GradImpl>(width, height));
}

LinearMap make_stack(const LinearMap& a, const LinearMap& q) {
  if (a.domain_dim() != q.domain_dim()) {
    throw DimensionError("make_stack: operands must share a domain", a.domain_dim(), q.domain_dim());
  }
  return LinearMap(LinearMap::Kind::Stack, std::make_shared<StackImpl>(a, q));
}

LinearMap make_centring(const FlatAreaCollection& collection, Index width, Index height) {
  require_positive("make_centring", width);
  require_positive("make_centring", height);
  collection.validate(width * height);
  if (collection.regions.empty()) throw std::invalid_argument("make_centring: no regions");
  return LinearMap(LinearMap::Kind::Centring, std::make_shared<CentringImpl>(collection, width * height));
}

Matrix to_dense(const LinearMap& op) {
  Matrix m(op.codomain_dim(), op.domain_dim());
  Vector e = Vector::Zero(op.domain_dim());
  for (Index j = 0; j < op.domain_dim(); ++j) {
    e[j] = 1.0;
    m.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return m;
}

}  // namespace regcomplex
