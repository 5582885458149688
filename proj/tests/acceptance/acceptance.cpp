// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [--only 1,5,9]

#include "regcomplex/cli.hpp"
#include "regcomplex/diagnostics.hpp"
#include "regcomplex/experiments.hpp"
#include "regcomplex/random.hpp"
#include "regcomplex/solvers.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace regcomplex;
using regcomplex::testing::random_vector;
using regcomplex::testing::worst_adjoint_error;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix mat(Index rows, Index cols, std::initializer_list<double> v) {
  Matrix m(rows, cols);
  Index i = 0;
  for (double x : v) m(i / cols, i % cols) = x, ++i;
  return m;
}

const std::vector<double> kTikhonovGrid{1e-1, 5e-2, 1e-2, 5e-3, 1e-3, 1e-4};
const std::vector<double> kDecades{1e-1, 1e-2, 1e-3, 1e-4};

struct TikhonovInstance {
  LinearMap a;
  Vector xhat;
  Vector w_hat;
};

// xhat = A^T v, so w_hat = -v certifies the source condition for 1/2 |x|^2.
TikhonovInstance tikhonov_instance(int i) {
  Xoshiro256 rng(derive_seed(2024, static_cast<std::uint64_t>(i)));
  const Matrix m = Matrix::NullaryExpr(10, 10, [&] { return rng.normal(); });
  const Vector v = random_vector(10, rng);
  const LinearMap a = make_dense(m);
  return {a, a.adjoint_apply(v), -v};
}

Schedule lasso_schedule() {
  Schedule s;
  s.alpha_rule = parse_alpha_rule("power:1:1");
  s.n_rule = parse_n_rule("power:1:1.5");
  return s;
}

// --- 1 -----------------------------------------------------------------------

Outcome tikhonov_bound() {
  Schedule schedule;
  schedule.alpha_rule = parse_alpha_rule("half-delta");
  double min_slack = kInfinity;
  int rows = 0;
  for (int i = 0; i < 100; ++i) {
    const TikhonovInstance inst = tikhonov_instance(i);
    const SweepResult r = run_tikhonov_sweep(inst.a, inst.xhat, inst.w_hat, schedule, kTikhonovGrid, {static_cast<std::uint64_t>(i)});
    for (const SweepRow& row : r.rows) {
      // Recompute the right-hand side here rather than trusting the row.
      const double rhs = row.data_dist * row.data_dist / (2.0 * row.alpha) + 0.5 * row.alpha * inst.w_hat.squaredNorm();
      min_slack = std::min(min_slack, rhs - row.dist_to_truth * row.dist_to_truth);
      ++rows;
    }
  }
  return {min_slack >= -1e-9 && rows == 600, "min slack " + num(min_slack) + " over " + std::to_string(rows) + " rows"};
}

// --- 2 -----------------------------------------------------------------------

Outcome bregman_bound() {
  Schedule schedule;
  schedule.alpha_rule = parse_alpha_rule("half-delta");
  double min_slack = kInfinity;
  int rows = 0;
  bool ok = true;
  for (int i = 0; i < 100; ++i) {
    const TikhonovInstance inst = tikhonov_instance(i);
    SourceCertificate cert;
    cert.w = inst.w_hat;
    cert.d = -inst.a.adjoint_apply(inst.w_hat);
    cert.residual = (cert.d - inst.xhat).norm();
    cert.found = cert.residual < 1e-8;
    ok = ok && cert.found;
    for (double delta : kTikhonovGrid) {
      const double alpha = alpha_of(schedule, delta);
      const GeneratedData data = generate_data(
          inst.xhat, inst.a,
          {NoiseKind::AdditiveGaussianOnData, delta / std::sqrt(10.0), derive_seed(7, static_cast<std::uint64_t>(i))});
      const Vector x = tikhonov_solve(inst.a, data.b_delta, alpha);
      const BoundCheck b =
          verify_bregman_bound(Functional::squared_norm(), cert, x, inst.xhat, 0.0, data.delta_measured, alpha);
      min_slack = std::min(min_slack, b.rhs - b.lhs);
      ok = ok && b.holds;
      ++rows;
    }
  }

  struct Toy {
    Matrix a;
    Vector xhat;
  };
  const std::vector<Toy> toys{{mat(1, 2, {1, 1}), vec({1, 0})},
                              {mat(2, 2, {1, 0, 0, 1}), vec({1, -2})},
                              {mat(2, 3, {1, 0.5, 0, 0, 1, 0.5}), vec({1, 0, 0})},
                              {mat(1, 2, {1, 0}), vec({1, 0})}};
  double worst_residual = 0.0;
  for (std::size_t t = 0; t < toys.size(); ++t) {
    const LinearMap a = make_dense(toys[t].a);
    const SourceCertificate cert = find_l1_certificate(a, toys[t].xhat);
    worst_residual = std::max(worst_residual, cert.residual);
    if (!(cert.found && cert.residual < 1e-8)) return {false, "toy " + std::to_string(t) + " certificate residual " + num(cert.residual)};
    const SetDistance dist = [&](const Vector& x) { return (x - toys[t].xhat).norm(); };
    const SweepResult r = run_lasso_sweep(a, toys[t].xhat, lasso_schedule(), kDecades, dist, cert, {t});
    for (const SweepRow& row : r.rows) {
      min_slack = std::min(min_slack, *row.bound_rhs - *row.bound_lhs);
      ok = ok && *row.bound_holds;
      ++rows;
    }
  }

  // Strong estimate on the strictly complementary toy A = [1 0], xhat = (1, 0).
  const Matrix a10 = mat(1, 2, {1, 0});
  const LinearMap op = make_dense(a10);
  const Vector xhat = vec({1, 0});
  const SourceCertificate cert = find_l1_certificate(op, xhat);
  const LassoGammaBound gb = lasso_admissible_gamma(a10, xhat, cert.d, 0.1);
  const double gamma = std::min(0.35, 0.99 * gb.gamma_sup);
  double strong_slack = kInfinity;
  for (std::size_t i = 0; i < kDecades.size(); ++i) {
    const double delta = kDecades[i];
    const double alpha = delta;
    if (alpha > 0.5 - gamma) return {false, "alpha exceeds 1/2 - gamma"};
    const GeneratedData data = generate_data(xhat, op, {NoiseKind::AdditiveGaussianOnData, delta, derive_seed(11, i)});
    const ProblemSpec spec{op, data.b_delta, Functional::l1(alpha), std::nullopt};
    const SolveTrace tr = forward_backward(spec, {0.99, 0.0, 1.0}, Vector::Zero(2), static_cast<int>(std::ceil(std::pow(delta, -1.5))));
    const double e = lasso_duality_gap(op, data.b_delta, alpha, tr.final_primal);
    const BoundCheck s = verify_strong_estimate(tr.final_primal, xhat, e, data.delta_measured, alpha, gamma, alpha, cert.w.norm());
    strong_slack = std::min(strong_slack, s.rhs - s.lhs);
    ok = ok && s.holds;
    ++rows;
  }
  return {ok && min_slack >= -1e-9,
          "Bregman min slack " + num(min_slack) + ", strong-estimate min slack " + num(strong_slack) + ", " +
              std::to_string(rows) + " rows, worst certificate residual " + num(worst_residual)};
}

// --- 3 -----------------------------------------------------------------------

Outcome fb_complexity() {
  double min_slack = kInfinity, worst_increase = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    Xoshiro256 rng(derive_seed(3003, static_cast<std::uint64_t>(inst)));
    const Matrix m = Matrix::NullaryExpr(30, 50, [&] { return rng.normal(); });
    const LinearMap a = make_dense(m);
    const Vector b = random_vector(30, rng);
    const double alpha = 0.1 * a.adjoint_apply(b).lpNorm<Eigen::Infinity>();
    const double norm = estimate_norm(a, 1e-13, 100000).value;
    const double l = norm * norm * (1.0 + 1e-9);
    const StepParams steps{0.99 / l, 0.0, l};
    const ProblemSpec spec{a, b, Functional::l1(alpha), std::nullopt};
    const Vector x0 = Vector::Zero(50);

    const SolveTrace ref = forward_backward(spec, steps, x0, 1000000);
    const double f_ref = ref.records.back().objective;
    double prev = ref.initial_objective;
    for (const IterationRecord& rec : ref.records) {
      worst_increase = std::max(worst_increase, rec.objective - prev);
      prev = rec.objective;
    }
    for (int n : {10, 100, 1000}) {
      const double gap = ref.records[static_cast<std::size_t>(n - 1)].objective - f_ref;
      min_slack = std::min(min_slack, fb_accuracy_bound(x0, ref.final_primal, steps.tau, n) - gap);
    }
  }
  return {min_slack >= -1e-9 && worst_increase <= 1e-9,
          "min bound slack " + num(min_slack) + ", largest objective increase " + num(worst_increase)};
}

// --- 4 -----------------------------------------------------------------------

Outcome pdps_gap() {
  const Phantom ph = make_phantom({PhantomKind::Disk, 16, 16, ""});
  const Index n = 256;
  const Vector b = ph.image.values + gaussian_noise(n, 0.1, 404);
  const ProblemSpec spec{make_identity(n), b, Functional::group_l21(0.1, 2, GroupLayout::Planar), make_grad2d(16, 16)};
  const SaddlePointProblem problem = SaddlePointProblem::from(spec);
  const StepParams steps = pdps_default_steps(estimate_norm(problem.k, 1e-13, 100000).value);
  const Vector x0 = Vector::Zero(n), y0 = Vector::Zero(problem.k.codomain_dim());

  const SolveTrace ref = pdps(spec, steps, x0, y0, 200000);
  const Vector& xr = ref.final_primal;
  const Vector& yr = ref.final_dual;
  const double half_initial = 0.5 * m_norm_squared(steps, problem.k, x0 - xr, y0 - yr);
  double cumulative = 0.0, min_slack = kInfinity;
  pdps(spec, steps, x0, y0, 10000, std::nullopt, [&](int, const Vector& x, const Vector& y) {
    cumulative += lagrangian_gap(problem, x, y, xr, yr);
    min_slack = std::min(min_slack, half_initial - cumulative);
  });
  const double ref_step = (ref.final_primal - pdps(spec, steps, xr, yr, 1).final_primal).norm();
  return {min_slack >= -1e-8, "min slack " + num(min_slack) + " against 1/2 |u0 - u|_M^2 = " + num(half_initial) +
                                  ", reference fixed-point residual " + num(ref_step)};
}

// --- 5 -----------------------------------------------------------------------

Outcome lasso_set_convergence() {
  const LinearMap a = make_dense(mat(1, 2, {1, 1}));
  const Vector xhat = vec({1, 0});
  const SourceCertificate cert = find_l1_certificate(a, xhat);
  const SweepResult r = run_lasso_sweep(a, xhat, lasso_schedule(), kDecades, segment_distance(vec({1, 0}), vec({0, 1})), cert);
  bool decreasing = true;
  std::string values;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (i > 0 && !(*r.rows[i].set_dist < *r.rows[i - 1].set_dist)) decreasing = false;
    values += (i ? ", " : "") + num(*r.rows[i].set_dist);
  }
  const double last = *r.rows.back().set_dist;
  const bool conditions = r.conditions && r.conditions->passes;
  return {decreasing && last < 1e-3 && r.rows.size() == 4 && conditions,
          "dist to Xhat: " + values + "; schedule conditions " + (conditions ? "pass" : "fail")};
}

// --- 6 -----------------------------------------------------------------------

Outcome regularisation_complexity() {
  TvSweepConfig cfg;
  cfg.phantom = make_phantom({PhantomKind::Disk, 64, 64, ""});
  cfg.delta_breves = {1, 0.5, 0.1, 0.05, 0.01, 0.005, 0.001, 5e-4, 1e-4};
  cfg.fixed_ns = {100, 1000};
  const std::vector<SweepResult> res = run_tv_deblur_sweep(cfg);
  const double nd_first = res[0].rows.front().normalized_dist;
  const double nd_last = res[0].rows.back().normalized_dist;
  const double f100_last = res[1].rows.back().normalized_dist;
  const double f1000_last = res[2].rows.back().normalized_dist;
  const bool a = nd_last < 0.5 * nd_first;
  const bool b = f100_last > nd_last;
  return {a && b, std::string("(a) ") + (a ? "ok" : "fails") + ": N_delta curve " + num(nd_first) + " -> " +
                      num(nd_last) + " (ratio " + num(nd_last / nd_first) + ", target < 0.5, N = " +
                      std::to_string(res[0].rows.back().n_iters) + " at 1e-4); (b) " + (b ? "ok" : "fails") +
                      ": fixed 100 gives " + num(f100_last) + " > " + num(nd_last) + "; fixed 1000 gives " +
                      num(f1000_last)};
}

// --- 7 -----------------------------------------------------------------------

Outcome subregularity_controls() {
  // Positive control: A = [1 0], xhat = (1, 0), d = (1, 0) is strictly complementary.
  const Matrix a10 = mat(1, 2, {1, 0});
  const Vector xhat = vec({1, 0});
  SourceCertificate cert = find_l1_certificate(make_dense(a10), xhat);
  const LassoGammaBound gb = lasso_admissible_gamma(a10, xhat, cert.d, 0.1);
  const double gamma = 0.99 * gb.gamma_sup;
  SubdiffCheck pos{.a = make_dense(a10),
                   .r = Functional::l1(),
                   .alpha = 0.5 - gamma,
                   .xhat = xhat,
                   .d = cert.d,
                   .gamma = gamma,
                   .gamma_delta = 0.5 - gamma,
                   .radius = 0.1,
                   .n_samples = 5000,
                   .seed = 77,
                   .target = SubregTarget::StrongNorm,
                   .distance = {},
                   .rho = std::nullopt,
                   .probe_points = {},
                   .tol = 1e-12};
  const SubregularityReport p = check_strong_subdiff_sampled(pos);

  // Negative control: A = [1 1], d = (1, 1), kernel direction (-1, 1).
  const Matrix a11 = mat(1, 2, {1, 1});
  cert = find_l1_certificate(make_dense(a11), xhat);
  const LassoGammaBound gn = lasso_admissible_gamma(a11, xhat, cert.d, 0.1);
  const double gamma_n = 0.99 * gn.gamma_sup;
  const Vector probe = xhat + 0.05 * vec({-1, 1});
  SubdiffCheck neg = pos;
  neg.a = make_dense(a11);
  neg.d = cert.d;
  neg.gamma = gamma_n;
  neg.alpha = neg.gamma_delta = 0.5 - gamma_n;
  neg.n_samples = 1;
  neg.probe_points = {probe};
  const SubregularityReport kn = check_strong_subdiff_sampled(neg);
  neg.n_samples = 5000;
  neg.probe_points.clear();
  const SubregularityReport rn = check_strong_subdiff_sampled(neg);

  const bool kernel_hit = kn.violated_at && (*kn.violated_at - probe).norm() == 0.0;
  const bool ok = !p.violated_at && kernel_hit && rn.violated_at.has_value();
  return {ok, "strictly complementary: gamma " + num(gamma) + ", min slack " + num(p.min_slack) +
                  "; [1 1]: kernel probe slack " + num(kn.min_slack) + ", random-sample min slack " +
                  num(rn.min_slack)};
}

// --- 8 -----------------------------------------------------------------------

Outcome fidelity_constants() {
  const FidelityReport c3 = check_fidelity_conditions(Functional::squared_norm(), 3, 2, 2, 3, 0.5, 10000, 8);
  const FidelityReport c1 = check_fidelity_conditions(Functional::squared_norm(), 3, 2, 2, 1, 0.5, 10000, 8);
  return {c3.holder_min_slack >= -1e-12 && !c3.holder_violation && c1.holder_violation.has_value(),
          "C = 3: min slack " + num(c3.holder_min_slack) + " over " + std::to_string(c3.n_pairs) +
              " pairs; C = 1: min slack " + num(c1.holder_min_slack)};
}

// --- 9 -----------------------------------------------------------------------

// Minimiser of 1/2 (z - x)^2 + tau |z| on a uniform grid.
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

// Coarse-to-fine grid search for 1/2 |z - x|^2 + tau |z|_2 in the plane.
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

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome infrastructure() {
  Xoshiro256 rng(909);
  const Phantom ph = make_phantom({PhantomKind::Disk, 32, 24, ""});
  const Matrix m = Matrix::NullaryExpr(7, 5, [&] { return rng.normal(); });
  const std::vector<LinearMap> ops{make_dense(m),
                                   make_identity(6),
                                   make_zero(4, 3),
                                   make_scaled(-1.5, make_dense(m)),
                                   make_gaussian_blur(32, 24, 2.0, 7),
                                   make_grad2d(32, 24),
                                   make_stack(make_gaussian_blur(32, 24, 2.0, 7), make_grad2d(32, 24)),
                                   make_centring(ph.flat_areas, 32, 24)};
  double adjoint = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) adjoint = std::max(adjoint, worst_adjoint_error(ops[i], 50, 900 + i));

  double prox_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double x = 4.0 * rng.normal();
    const double tau = 0.1 + 2.0 * rng.uniform();
    prox_err = std::max(prox_err, std::abs(prox(Functional::l1(), tau, vec({x}))[0] - grid_prox_abs(x, tau, 1e-6)));
  }
  for (int i = 0; i < 10; ++i) {
    const Vector x = random_vector(2, rng, 2.0);
    const double tau = 0.2 + 2.0 * rng.uniform();
    prox_err = std::max(prox_err, (prox(Functional::group_l21(1.0, 2), tau, x) - grid_prox_group(x, tau)).norm());
  }

  const Index n = 8;
  const std::vector<Functional> kinds{Functional::squared_norm(1.7),
                                      Functional::l1(0.6),
                                      Functional::group_l21(0.9, 2),
                                      Functional::group_l21(1.2, 2, GroupLayout::Planar),
                                      Functional::nonneg_indicator(),
                                      Functional::squared_distance_to_data(random_vector(n, rng), 1.3),
                                      Functional::zero()};
  double moreau = 0.0;
  for (const Functional& f : kinds) {
    for (int t = 0; t < 100; ++t) {
      const Vector x = random_vector(n, rng, 3.0);
      const double tau = 0.05 + 4.0 * rng.uniform();
      const Vector lhs = prox(f, tau, x) + tau * prox_conjugate(f, 1.0 / tau, x / tau);
      moreau = std::max(moreau, (lhs - x).lpNorm<Eigen::Infinity>() / (1.0 + x.lpNorm<Eigen::Infinity>()));
    }
  }

  // Rerun every sweep experiment from its own sidecar and compare bytes.
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "regcomplex_acceptance";
  std::filesystem::create_directories(dir);
  std::ostringstream log;
  bool identical = true;
  for (const std::string experiment : {"tikhonov", "lasso", "tv-deblur"}) {
    const std::string first = (dir / (experiment + "_1.csv")).string();
    const std::string second = (dir / (experiment + "_2.csv")).string();
    std::vector<std::string> args{experiment, "--seed", "5", "--out", first};
    if (experiment == "tv-deblur") args.insert(args.end(), {"--size", "32", "--delta-grid", "1,0.1,0.01"});
    cli::run(*cli::parse_config(args).config, log);
    cli::run(*cli::parse_config({"--config", first + ".json", "--out", second, "--report", second + ".json"}).config, log);
    const std::string a = slurp(first);
    identical = identical && !a.empty() && a == slurp(second);
  }

  return {adjoint <= 1e-10 && prox_err <= 1e-6 && moreau <= 1e-10 && identical,
          "adjoint " + num(adjoint) + ", prox vs grid " + num(prox_err) + ", Moreau " + num(moreau) +
              ", sidecar reruns " + (identical ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) != "--only") {
      std::cerr << "usage: acceptance [--only 1,2,...]\n";
      return 2;
    }
    std::stringstream list(argv[i + 1]);
    for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
  }

  const std::vector<Criterion> criteria{
      {1, "tikhonov-bound", 5, tikhonov_bound},
      {2, "bregman-bound", 10, bregman_bound},
      {3, "fb-complexity", 60, fb_complexity},
      {4, "pdps-ergodic-gap", 60, pdps_gap},
      {5, "lasso-set-convergence", 30, lasso_set_convergence},
      {6, "regularisation-complexity", 600, regularisation_complexity},
      {7, "subregularity-controls", 10, subregularity_controls},
      {8, "fidelity-constants", 5, fidelity_constants},
      {9, "infrastructure", 30, infrastructure},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = out.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << out.detail << " ("
              << num(seconds) << " s, budget " << c.budget_seconds << " s" << (in_time ? "" : ", OVER BUDGET")
              << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
