#include "regcomplex/prox.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace regcomplex;
using regcomplex::testing::random_vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Brute-force minimiser of 1/2 (z - x)^2 + tau |z| on a uniform grid.
double grid_prox_abs(double x, double tau, double step) {
  const double lo = -std::abs(x) - 1.0;
  const long count = static_cast<long>(2.0 * (std::abs(x) + 1.0) / step);
  double best_z = 0.0, best = kInfinity;
  for (long i = 0; i <= count; ++i) {
    const double z = lo + static_cast<double>(i) * step;
    const double v = 0.5 * (z - x) * (z - x) + tau * std::abs(z);
    if (v < best) best = v, best_z = z;
  }
  return best_z;
}

// Coarse-to-fine 2-D grid search for 1/2 |z - x|^2 + tau |z|_2.
Vector grid_prox_group(const Vector& x, double tau) {
  double cx = 0.0, cy = 0.0, half = 10.0;
  for (int level = 0; level < 8; ++level) {
    const double h = half / 50.0;
    double bx = cx, by = cy, best = kInfinity;
    for (int i = -50; i <= 50; ++i) {
      for (int j = -50; j <= 50; ++j) {
        const double zx = cx + i * h, zy = cy + j * h;
        const double v = 0.5 * ((zx - x[0]) * (zx - x[0]) + (zy - x[1]) * (zy - x[1])) + tau * std::hypot(zx, zy);
        if (v < best) best = v, bx = zx, by = zy;
      }
    }
    cx = bx, cy = by, half = 2.0 * h;
  }
  return vec({cx, cy});
}

std::vector<Functional> shipped_kinds(Index n, Xoshiro256& rng) {
  return {Functional::squared_norm(1.7),
          Functional::l1(0.6),
          Functional::group_l21(0.9, 2),
          Functional::group_l21(1.2, 2, GroupLayout::Planar),
          Functional::nonneg_indicator(),
          Functional::squared_distance_to_data(random_vector(n, rng), 1.3),
          Functional::zero()};
}

}  // namespace

TEST(Value, Examples) {
  EXPECT_DOUBLE_EQ(value(Functional::l1(1.0), vec({1, -2, 0})), 3.0);
  EXPECT_DOUBLE_EQ(value(Functional::squared_norm(2.0), vec({3, 4})), 25.0);
  EXPECT_DOUBLE_EQ(value(Functional::group_l21(1.0, 2), vec({3, 4, 0, 0})), 5.0);
  EXPECT_DOUBLE_EQ(value(Functional::nonneg_indicator(), vec({0, -1e-13, 2})), 0.0);
  EXPECT_EQ(value(Functional::nonneg_indicator(), vec({0, -1e-11})), kInfinity);
  EXPECT_DOUBLE_EQ(value(Functional::squared_distance_to_data(vec({1, 1})), vec({3, 1})), 2.0);
  EXPECT_DOUBLE_EQ(value(Functional::zero(), vec({5})), 0.0);
}

TEST(Value, PlanarGroupsCollectPixelGradients) {
  // Two pixels; x-differences (3, 0) then y-differences (4, 1).
  const Functional tv = Functional::group_l21(1.0, 2, GroupLayout::Planar);
  EXPECT_DOUBLE_EQ(value(tv, vec({3, 0, 4, 1})), 6.0);
  EXPECT_EQ(group_norms(tv, vec({3, 0, 4, 1})), vec({5, 1}));
}

TEST(Value, Errors) {
  EXPECT_THROW(value(Functional::group_l21(1.0, 2), vec({1, 2, 3})), std::invalid_argument);
  EXPECT_THROW(value(Functional::squared_distance_to_data(vec({1, 2})), vec({1})), DimensionError);
  EXPECT_THROW(Functional::l1(-1.0), std::invalid_argument);
}

TEST(Prox, Examples) {
  EXPECT_EQ(prox(Functional::l1(1.0), 1.0, vec({2.5, -0.5})), vec({1.5, 0}));
  EXPECT_EQ(prox(Functional::squared_norm(1.0), 1.0, vec({2})), vec({1}));
  EXPECT_TRUE(prox(Functional::group_l21(1.0, 2), 1.0, vec({3, 4})).isApprox(vec({2.4, 3.2}), 1e-15));
  EXPECT_EQ(prox(Functional::nonneg_indicator(), 0.3, vec({-1, 2})), vec({0, 2}));
  EXPECT_EQ(prox(Functional::zero(), 0.3, vec({-1, 2})), vec({-1, 2}));
  EXPECT_THROW(prox(Functional::l1(1.0), 0.0, vec({1})), std::invalid_argument);
}

TEST(Prox, L1MatchesBruteForceGrid) {
  Xoshiro256 rng(101);
  for (int i = 0; i < 50; ++i) {
    const double x = 4.0 * rng.normal();
    const double tau = 0.1 + 2.0 * rng.uniform();
    const double ours = prox(Functional::l1(1.0), tau, vec({x}))[0];
    EXPECT_NEAR(ours, grid_prox_abs(x, tau, 1e-6), 1e-6) << x << " " << tau;
  }
}

TEST(Prox, GroupMatchesBruteForceGrid) {
  EXPECT_LT((grid_prox_group(vec({3, 4}), 1.0) - vec({2.4, 3.2})).norm(), 1e-6);
  Xoshiro256 rng(103);
  for (int i = 0; i < 20; ++i) {
    const Vector x = random_vector(2, rng, 2.0);
    const double tau = 0.2 + 2.0 * rng.uniform();
    const Vector ours = prox(Functional::group_l21(1.0, 2), tau, x);
    EXPECT_LT((ours - grid_prox_group(x, tau)).norm(), 1e-6);
  }
}

TEST(Prox, OptimalityAgainstRandomCompetitors) {
  Xoshiro256 rng(107);
  const Index n = 6;
  for (const Functional& f : shipped_kinds(n, rng)) {
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector x = random_vector(n, rng, 2.0);
      const double tau = 0.05 + 3.0 * rng.uniform();
      const Vector p = prox(f, tau, x);
      const double at_p = 0.5 * (p - x).squaredNorm() + tau * value(f, p);
      for (int c = 0; c < 100; ++c) {
        Vector z = p + random_vector(n, rng, c % 2 == 0 ? 0.01 : 1.0);
        if (f.kind() == Functional::Kind::NonnegIndicator) z = z.cwiseMax(0.0);
        const double at_z = 0.5 * (z - x).squaredNorm() + tau * value(f, z);
        worst = std::max(worst, at_p - at_z);
      }
    }
    EXPECT_LE(worst, 1e-9) << to_string(f.kind());
  }
}

TEST(ProxConjugate, Examples) {
  const Functional group = Functional::group_l21(1.0, 2);
  for (double sigma : {0.01, 1.0, 50.0}) {
    EXPECT_TRUE(prox_conjugate(group, sigma, vec({3, 4})).isApprox(vec({0.6, 0.8}), 1e-15));
    EXPECT_EQ(prox_conjugate(group, sigma, vec({0.3, 0.4})), vec({0.3, 0.4}));
  }
  EXPECT_DOUBLE_EQ(prox_conjugate(Functional::squared_distance_to_data(vec({0})), 1.0, vec({2}))[0], 1.0);
  // (y - sigma b) / (1 + sigma) with b = 3, sigma = 0.5, y = 2.
  EXPECT_DOUBLE_EQ(prox_conjugate(Functional::squared_distance_to_data(vec({3})), 0.5, vec({2}))[0], 1.0 / 3.0);
}

TEST(ProxConjugate, DataTermMatchesDirectMinimisation) {
  // Minimise 1/2 (z - y)^2 + sigma (z b + z^2 / 2) by scanning a fine grid.
  const double y = 2.0, b = -0.7, sigma = 0.8;
  double best_z = 0.0, best = kInfinity;
  for (double z = -5.0; z <= 5.0; z += 1e-6) {
    const double v = 0.5 * (z - y) * (z - y) + sigma * (z * b + 0.5 * z * z);
    if (v < best) best = v, best_z = z;
  }
  EXPECT_NEAR(prox_conjugate(Functional::squared_distance_to_data(vec({b})), sigma, vec({y}))[0], best_z, 1e-6);
}

TEST(ProxConjugate, MoreauIdentity) {
  Xoshiro256 rng(109);
  const Index n = 8;
  for (const Functional& f : shipped_kinds(n, rng)) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vector x = random_vector(n, rng, 3.0);
      const double tau = 0.05 + 4.0 * rng.uniform();
      const Vector lhs = prox(f, tau, x) + tau * prox_conjugate(f, 1.0 / tau, x / tau);
      EXPECT_LT((lhs - x).lpNorm<Eigen::Infinity>(), 1e-10 * (1.0 + x.lpNorm<Eigen::Infinity>()))
          << to_string(f.kind());
    }
  }
}

TEST(ProxConjugate, FenchelYoungEquality) {
  // p = prox_{sigma f*}(y) gives y - p in sigma-scaled subdifferential of f*,
  // so f(u) + f*(p) = <u, p> with u = (y - p) / sigma.
  Xoshiro256 rng(113);
  const Index n = 6;
  for (const Functional& f : shipped_kinds(n, rng)) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector y = random_vector(n, rng, 2.0);
      const double sigma = 0.1 + 2.0 * rng.uniform();
      const Vector p = prox_conjugate(f, sigma, y);
      const Vector u = (y - p) / sigma;
      const double gap = value(f, u) + conjugate_value(f, p) - u.dot(p);
      EXPECT_NEAR(gap, 0.0, 1e-9 * (1.0 + u.squaredNorm() + p.squaredNorm())) << to_string(f.kind());
    }
  }
}

TEST(Prox, FirmlyNonexpansive) {
  Xoshiro256 rng(127);
  const Index n = 6;
  for (const Functional& f : shipped_kinds(n, rng)) {
    for (int trial = 0; trial < 500; ++trial) {
      const Vector x = random_vector(n, rng, 2.0), y = random_vector(n, rng, 2.0);
      const double tau = 0.05 + 3.0 * rng.uniform();
      const Vector d = prox(f, tau, x) - prox(f, tau, y);
      EXPECT_LE(d.squaredNorm(), d.dot(x - y) + 1e-10) << to_string(f.kind());
    }
  }
}

TEST(Gradient, ExamplesAndErrors) {
  EXPECT_EQ(gradient(Functional::squared_norm(1.0), vec({1, 2})), vec({1, 2}));
  EXPECT_EQ(gradient(Functional::squared_distance_to_data(vec({1})), vec({3})), vec({2}));
  EXPECT_THROW(gradient(Functional::l1(1.0), vec({1})), std::invalid_argument);
  EXPECT_THROW(gradient(Functional::nonneg_indicator(), vec({1})), std::invalid_argument);
}

TEST(Gradient, MatchesCentralDifferences) {
  Xoshiro256 rng(131);
  const Index n = 5;
  const std::vector<Functional> smooth = {Functional::squared_norm(2.3),
                                          Functional::squared_distance_to_data(random_vector(n, rng), 0.4),
                                          Functional::zero()};
  for (const Functional& f : smooth) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = random_vector(n, rng);
      const Vector g = gradient(f, x);
      const double h = 1e-5;
      for (Index k = 0; k < n; ++k) {
        Vector xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        EXPECT_NEAR((value(f, xp) - value(f, xm)) / (2.0 * h), g[k], 1e-6);
      }
    }
  }
}

TEST(Bregman, Examples) {
  EXPECT_DOUBLE_EQ(bregman_divergence(Functional::squared_norm(1.0), {vec({0})}, vec({2}), vec({0})), 2.0);
  EXPECT_DOUBLE_EQ(bregman_divergence(Functional::l1(1.0), {vec({1, 0.3})}, vec({1, 0}), vec({1, 0})), 0.0);
  EXPECT_DOUBLE_EQ(bregman_divergence(Functional::l1(1.0), {vec({1, 0})}, vec({1, 2}), vec({1, 0})), 2.0);
  EXPECT_THROW(bregman_divergence(Functional::l1(1.0), {vec({0.5, 0})}, vec({1, 2}), vec({1, 0})),
               std::invalid_argument);
  EXPECT_THROW(bregman_divergence(Functional::squared_norm(1.0), {vec({1})}, vec({2}), vec({0})),
               std::invalid_argument);
}

TEST(Bregman, QuadraticIdentityAndNonnegativity) {
  Xoshiro256 rng(137);
  const double w = 0.7;
  for (int trial = 0; trial < 200; ++trial) {
    const Vector xhat = random_vector(4, rng), x = random_vector(4, rng);
    const double b = bregman_divergence(Functional::squared_norm(w), {w * xhat}, x, xhat);
    EXPECT_NEAR(b, 0.5 * w * (x - xhat).squaredNorm(), 1e-12);

    Vector sparse = xhat;
    sparse[1] = 0.0;
    Vector d = sparse.cwiseSign();
    d[1] = 2.0 * rng.uniform() - 1.0;
    const Functional l1 = Functional::l1(1.3);
    EXPECT_GE(bregman_divergence(l1, {1.3 * d}, x, sparse), -1e-12);
  }
}

TEST(SignSet, Membership) {
  EXPECT_TRUE(sign_set_membership(vec({1, 0}), vec({1, 0.5})));
  EXPECT_FALSE(sign_set_membership(vec({1, 0}), vec({0.9, 0})));
  EXPECT_TRUE(sign_set_membership(vec({0, 0, 0}), vec({1, -1, 0.2})));
  EXPECT_FALSE(sign_set_membership(vec({0}), vec({1.1})));
  EXPECT_TRUE(sign_set_membership(vec({-2}), vec({-1})));
  EXPECT_FALSE(sign_set_membership(vec({1}), vec({1, 0})));
}
