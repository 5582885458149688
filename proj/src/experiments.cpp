#include "regcomplex/experiments.hpp"
#include "regcomplex/parallel.hpp"
#include "regcomplex/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace regcomplex {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t row_seed(const SweepOptions& options, std::size_t row) {
  return options.streams == NoiseStreams::Common ? options.seed : derive_seed(options.seed, row);
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : num; }

int checked_iterations(std::int64_t n, const char* what) {
  if (n > std::numeric_limits<int>::max()) {
    throw std::invalid_argument(std::string(what) + ": iteration count " + std::to_string(n) + " is too large");
  }
  return static_cast<int>(n);
}

}  // namespace

Vector gaussian_noise(Index n, double std_dev, std::uint64_t seed) {
  if (!(std_dev >= 0.0)) throw std::invalid_argument("gaussian_noise: std_dev must be nonnegative");
  if (std_dev == 0.0) return Vector::Zero(n);
  Xoshiro256 rng(seed);
  return std_dev * standard_normals(n, rng);
}

GeneratedData generate_data(const Vector& xhat, const LinearMap& a, const NoiseModel& model) {
  require_length("generate_data xhat", xhat, a.domain_dim());
  GeneratedData out;
  out.b_hat = a.apply(xhat);
  switch (model.kind) {
    case NoiseKind::PixelwiseGaussianThenBlur:
      out.b_delta = a.apply(xhat + gaussian_noise(xhat.size(), model.level, model.seed));
      break;
    case NoiseKind::AdditiveGaussianOnData:
      out.b_delta = out.b_hat + gaussian_noise(out.b_hat.size(), model.level, model.seed);
      break;
  }
  out.delta_measured = (out.b_delta - out.b_hat).norm();
  return out;
}

// --- phantoms ----------------------------------------------------------------

namespace {

// Pixels whose whole (2r+1)^2 neighbourhood, clipped to the grid, shares the label.
std::vector<Index> eroded(const std::vector<int>& label, Index width, Index height, int want, int r) {
  std::vector<Index> out;
  for (Index row = 0; row < height; ++row) {
    for (Index col = 0; col < width; ++col) {
      bool keep = true;
      for (Index dr = -r; dr <= r && keep; ++dr) {
        for (Index dc = -r; dc <= r && keep; ++dc) {
          const Index rr = row + dr, cc = col + dc;
          if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
          keep = label[static_cast<std::size_t>(rr * width + cc)] == want;
        }
      }
      if (keep) out.push_back(row * width + col);
    }
  }
  return out;
}

Phantom labelled_phantom(const std::vector<int>& label, Index width, Index height) {
  Phantom p;
  Vector values(width * height);
  for (Index i = 0; i < values.size(); ++i) values[i] = label[static_cast<std::size_t>(i)];
  p.image = ImageGrid(width, height, std::move(values));
  for (int want : {1, 0}) {
    std::vector<Index> region = eroded(label, width, height, want, 2);
    if (!region.empty()) p.flat_areas.regions.push_back(std::move(region));
  }
  return p;
}

}  // namespace

Phantom make_phantom(const PhantomSpec& spec) {
  switch (spec.kind) {
    case PhantomKind::Disk: {
      if (spec.width < 8 || spec.height < 8) throw std::invalid_argument("make_phantom: disk needs at least 8x8");
      const double cx = 0.5 * static_cast<double>(spec.width - 1);
      const double cy = 0.5 * static_cast<double>(spec.height - 1);
      const double radius = static_cast<double>(std::min(spec.width, spec.height)) / 4.0;
      std::vector<int> label(static_cast<std::size_t>(spec.width * spec.height));
      for (Index row = 0; row < spec.height; ++row)
        for (Index col = 0; col < spec.width; ++col)
          label[static_cast<std::size_t>(row * spec.width + col)] =
              std::hypot(static_cast<double>(row) - cy, static_cast<double>(col) - cx) <= radius ? 1 : 0;
      return labelled_phantom(label, spec.width, spec.height);
    }
    case PhantomKind::Steps1D: {
      if (spec.width < 8) throw std::invalid_argument("make_phantom: steps need at least 8 samples");
      std::vector<int> label(static_cast<std::size_t>(spec.width));
      for (Index i = 0; i < spec.width; ++i) label[static_cast<std::size_t>(i)] = i >= spec.width / 2 ? 1 : 0;
      return labelled_phantom(label, spec.width, 1);
    }
    case PhantomKind::LoadedPGM: {
      Phantom p;
      p.image = read_pgm(spec.path);
      return p;
    }
  }
  throw std::invalid_argument("make_phantom: unknown kind");
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

long pgm_number(std::istream& in, const std::string& path) {
  const std::string tok = pgm_token(in);
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("read_pgm: malformed header field '" + tok + "' in " + path);
  }
}

}  // namespace

ImageGrid read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
  const std::string magic = pgm_token(in);
  if (magic != "P5" && magic != "P2") throw std::runtime_error("read_pgm: " + path + " is not a P2/P5 greymap");
  const long width = pgm_number(in, path);
  const long height = pgm_number(in, path);
  const long maxval = pgm_number(in, path);
  if (maxval > 65535) throw std::runtime_error("read_pgm: maxval above 65535 in " + path);
  const Index n = static_cast<Index>(width) * static_cast<Index>(height);
  Vector values(n);
  if (magic == "P5") {
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(static_cast<std::size_t>(n * bytes));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw std::runtime_error("read_pgm: truncated pixel data in " + path);
    }
    for (Index i = 0; i < n; ++i) {
      const std::size_t k = static_cast<std::size_t>(i * bytes);
      const unsigned v = bytes == 1 ? raw[k] : (static_cast<unsigned>(raw[k]) << 8) | raw[k + 1];
      values[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      long v;
      if (!(in >> v) || v < 0 || v > maxval) throw std::runtime_error("read_pgm: bad pixel value in " + path);
      values[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return ImageGrid(static_cast<Index>(width), static_cast<Index>(height), std::move(values));
}

void write_pgm(const std::string& path, const ImageGrid& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<unsigned char> raw(static_cast<std::size_t>(image.size()));
  for (Index i = 0; i < image.size(); ++i)
    raw[static_cast<std::size_t>(i)] =
        static_cast<unsigned char>(std::lround(255.0 * std::clamp(image.values[i], 0.0, 1.0)));
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path);
}

// --- sweeps ------------------------------------------------------------------

bool bounds_hold(const SweepResult& result) {
  return std::all_of(result.rows.begin(), result.rows.end(),
                     [](const SweepRow& r) { return !r.bound_holds || *r.bound_holds; });
}

SweepResult run_tikhonov_sweep(const LinearMap& a, const Vector& xhat, const Vector& w_hat, const Schedule& schedule,
                               const std::vector<double>& deltas, const SweepOptions& options) {
  require_descending_grid(deltas, "run_tikhonov_sweep");
  require_length("run_tikhonov_sweep xhat", xhat, a.domain_dim());
  require_length("run_tikhonov_sweep w_hat", w_hat, a.codomain_dim());
  const double mismatch = (xhat + a.adjoint_apply(w_hat)).norm();
  if (mismatch > 1e-10 * std::max(1.0, xhat.norm())) {
    throw std::invalid_argument("run_tikhonov_sweep: xhat != -A^T w_hat (mismatch " + std::to_string(mismatch) + ")");
  }
  const double m = static_cast<double>(a.codomain_dim());
  const double xhat_norm = xhat.norm();
  SweepResult result;
  result.label = "tikhonov";
  result.rows.resize(deltas.size());
  parallel_for(deltas.size(), [&](std::size_t i) {
    const auto start = Clock::now();
    const double delta = deltas[i];
    const GeneratedData data =
        generate_data(xhat, a, {NoiseKind::AdditiveGaussianOnData, delta / std::sqrt(m), row_seed(options, i)});
    const double alpha = alpha_of(schedule, delta);
    const Vector x = tikhonov_solve(a, data.b_delta, alpha);
    SweepRow& row = result.rows[i];
    row.level = delta;
    row.alpha = alpha;
    row.dist_to_truth = (x - xhat).norm();
    row.normalized_dist = safe_ratio(row.dist_to_truth, xhat_norm);
    row.data_dist = data.delta_measured;
    row.data_normalized = safe_ratio(data.delta_measured, data.b_hat.norm());
    row.objective = 0.5 * (a.apply(x) - data.b_delta).squaredNorm() + 0.5 * alpha * x.squaredNorm();
    row.e_delta = 0.0;
    row.bound_lhs = row.dist_to_truth * row.dist_to_truth;
    row.bound_rhs = tikhonov_error_bound(data.delta_measured, alpha, w_hat.norm());
    row.bound_holds = *row.bound_lhs <= *row.bound_rhs + 1e-9;
    row.runtime_ms = elapsed_ms(start);
  });
  return result;
}

double lasso_duality_gap(const LinearMap& a, const Vector& b, double alpha, const Vector& x) {
  const Vector r = b - a.apply(x);
  const double primal = 0.5 * r.squaredNorm() + alpha * x.lpNorm<1>();
  const double corr = a.adjoint_apply(r).lpNorm<Eigen::Infinity>();
  const double s = corr > alpha ? alpha / corr : 1.0;
  const Vector y = s * r;
  const double dual = b.dot(y) - 0.5 * y.squaredNorm();
  return std::max(0.0, primal - dual);
}

SweepResult run_lasso_sweep(const LinearMap& a, const Vector& xhat, const Schedule& schedule,
                            const std::vector<double>& deltas, const SetDistance& xhat_set_distance,
                            const std::optional<SourceCertificate>& certificate, const SweepOptions& options) {
  require_descending_grid(deltas, "run_lasso_sweep");
  require_length("run_lasso_sweep xhat", xhat, a.domain_dim());
  if (!xhat_set_distance) throw std::invalid_argument("run_lasso_sweep: a distance to Xhat is required");
  const double norm = estimate_norm(a, 1e-12, 10000).value;
  const double lipschitz = norm * norm;
  if (!(lipschitz > 0.0)) throw std::invalid_argument("run_lasso_sweep: operator norm is zero");
  const double tau = 0.99 / (lipschitz * (1.0 + 1e-6));
  const double m = static_cast<double>(a.codomain_dim());
  const double xhat_norm = xhat.norm();

  SweepResult result;
  result.label = "lasso";
  if (deltas.size() >= 3) result.conditions = check_convergence_conditions(schedule, deltas);
  result.rows.resize(deltas.size());
  parallel_for(deltas.size(), [&](std::size_t i) {
    const auto start = Clock::now();
    const double delta = deltas[i];
    const GeneratedData data =
        generate_data(xhat, a, {NoiseKind::AdditiveGaussianOnData, delta / std::sqrt(m), row_seed(options, i)});
    const double alpha = alpha_of(schedule, delta);
    const std::int64_t n = n_of(schedule, delta);
    const ProblemSpec spec{a, data.b_delta, Functional::l1(alpha), std::nullopt};
    const SolveTrace trace = forward_backward(spec, {tau, 0.0, lipschitz}, Vector::Zero(xhat.size()),
                                              checked_iterations(n, "run_lasso_sweep"));
    const Vector& x = trace.final_primal;
    SweepRow& row = result.rows[i];
    row.level = delta;
    row.alpha = alpha;
    row.n_iters = n;
    row.dist_to_truth = (x - xhat).norm();
    row.normalized_dist = safe_ratio(row.dist_to_truth, xhat_norm);
    row.set_dist = xhat_set_distance(x);
    row.data_dist = data.delta_measured;
    row.data_normalized = safe_ratio(data.delta_measured, data.b_hat.norm());
    row.objective = trace.records.empty() ? trace.initial_objective : trace.records.back().objective;
    row.e_delta = lasso_duality_gap(a, data.b_delta, alpha, x);
    if (certificate) {
      const BoundCheck check =
          verify_bregman_bound(Functional::l1(), *certificate, x, xhat, *row.e_delta, data.delta_measured, alpha);
      row.bound_lhs = check.lhs;
      row.bound_rhs = check.rhs;
      row.bound_holds = check.holds;
    }
    row.runtime_ms = elapsed_ms(start);
  });
  return result;
}

std::vector<SweepResult> run_tv_deblur_sweep(const TvSweepConfig& config) {
  const ImageGrid& image = config.phantom.image;
  if (image.width < 16 || image.height < 16) throw std::invalid_argument("run_tv_deblur_sweep: image must be at least 16x16");
  require_descending_grid(config.delta_breves, "run_tv_deblur_sweep");
  for (std::int64_t n : config.fixed_ns)
    if (n < 1) throw std::invalid_argument("run_tv_deblur_sweep: fixed iteration counts must be positive");

  const Vector& xhat = image.values;
  const LinearMap blur = make_gaussian_blur(image.width, image.height, config.blur_std, config.blur_window);
  const LinearMap grad = make_grad2d(image.width, image.height);
  const LinearMap k = make_stack(blur, grad);
  const NormEstimate k_norm = estimate_norm(k, 1e-10, 10000);
  const StepParams steps = pdps_default_steps(k_norm.value);
  const double xhat_norm = xhat.norm();

  // Each level needs one PDPS run up to the largest requested N; the shorter
  // curves read off the same trace.
  std::vector<std::int64_t> n_delta(config.delta_breves.size()), n_max(config.delta_breves.size());
  for (std::size_t i = 0; i < n_delta.size(); ++i) {
    n_delta[i] = n_of(config.schedule, config.delta_breves[i]);
    n_max[i] = n_delta[i];
    for (std::int64_t n : config.fixed_ns) n_max[i] = std::max(n_max[i], n);
  }

  double per_iteration_ms = 0.0;
  if (config.cap_seconds) {
    const auto start = Clock::now();
    const ProblemSpec probe{blur, blur.apply(xhat), Functional::group_l21(0.5, 2, GroupLayout::Planar), grad};
    pdps(probe, steps, Vector::Zero(xhat.size()), Vector::Zero(k.codomain_dim()), 10, xhat);
    per_iteration_ms = elapsed_ms(start) / 10.0;
  }
  std::size_t levels = config.delta_breves.size();
  std::int64_t total = 0;
  for (std::size_t i = 0; i < config.delta_breves.size(); ++i) {
    total += n_max[i];
    const bool over_iterations = config.max_total_iterations && total > *config.max_total_iterations;
    const bool over_time =
        config.cap_seconds && per_iteration_ms * static_cast<double>(total) > 1000.0 * *config.cap_seconds;
    if (over_iterations || over_time) {
      levels = i;
      break;
    }
  }
  const bool truncated = levels < config.delta_breves.size();

  std::vector<std::string> labels{"n_delta"};
  for (std::int64_t n : config.fixed_ns) labels.push_back("fixed_" + std::to_string(n));
  std::vector<SweepResult> results(labels.size());
  for (std::size_t c = 0; c < labels.size(); ++c) {
    results[c].label = labels[c];
    results[c].truncated = truncated;
    results[c].rows.resize(levels);
  }
  if (levels >= 3) {
    results[0].conditions = check_convergence_conditions(
        config.schedule, std::vector<double>(config.delta_breves.begin(), config.delta_breves.begin() + levels));
  }

  parallel_for(levels, [&](std::size_t i) {
    const auto start = Clock::now();
    const double level = config.delta_breves[i];
    const GeneratedData data = generate_data(
        xhat, blur, {NoiseKind::PixelwiseGaussianThenBlur, level, row_seed(config.options, i)});
    const double alpha = alpha_of(config.schedule, level);
    const ProblemSpec spec{blur, data.b_delta, Functional::group_l21(alpha, 2, GroupLayout::Planar), grad};
    const SolveTrace trace = pdps(spec, steps, Vector::Zero(xhat.size()), Vector::Zero(k.codomain_dim()),
                                  checked_iterations(n_max[i], "run_tv_deblur_sweep"), xhat);
    const double ms = elapsed_ms(start);
    for (std::size_t c = 0; c < labels.size(); ++c) {
      const std::int64_t n = c == 0 ? n_delta[i] : config.fixed_ns[c - 1];
      const IterationRecord& rec = trace.records[static_cast<std::size_t>(n - 1)];
      SweepRow& row = results[c].rows[i];
      row.level = level;
      row.alpha = alpha;
      row.n_iters = n;
      row.dist_to_truth = *rec.distance;
      row.normalized_dist = safe_ratio(*rec.distance, xhat_norm);
      row.ergodic_normalized_dist = safe_ratio(*rec.ergodic_distance, xhat_norm);
      row.data_dist = data.delta_measured;
      row.data_normalized = safe_ratio(data.delta_measured, data.b_hat.norm());
      row.objective = rec.objective;
      row.runtime_ms = ms;
    }
  });
  return results;
}

std::vector<double> paper_delta_grid(int max_power) {
  if (max_power < 0) throw std::invalid_argument("paper_delta_grid: max_power must be nonnegative");
  std::vector<double> grid;
  for (int p = 0; p <= max_power; ++p) {
    const double scale = std::pow(10.0, -p);
    grid.push_back(scale);
    grid.push_back(0.5 * scale);
  }
  return grid;
}

}  // namespace regcomplex
